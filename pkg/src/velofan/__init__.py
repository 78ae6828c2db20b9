'''velofan: categorical n-associahedra and their velocity fans.'''

__version__ = '0.1.0'

"""
Main entry point for the rmalocks package.
"""

from .cli import main

if __name__ == '__main__':
    main()

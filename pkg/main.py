"""
Command-line application entry point
"""

import sys

from cli.commands import dispatch


def main() -> int:
    return dispatch(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())

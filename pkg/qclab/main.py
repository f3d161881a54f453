import sys
from typing import List, Optional

from .cli import build_parser
from .core.logging import configure_logging


def main(argv: Optional[List[str]] = None) -> int:
    """Console entry point for `qclab`"""
    args = build_parser().parse_args(argv)
    configure_logging("DEBUG" if args.verbose else None)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())

import logging

from rich.console import Console
from rich.logging import RichHandler

from .config import settings

console = Console(stderr=True)


def configure_logging(level: str | None = None) -> None:
    """Install a rich handler on the root logger"""
    logging.basicConfig(
        level=(level or settings.LOG_LEVEL).upper(),
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, show_path=settings.DEBUG)],
        force=True,
    )

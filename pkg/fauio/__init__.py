__version__ = "0.1.0"

from fauio.core.config import load_config  # noqa: E402
from fauio.main import cli, get_html  # noqa: E402

__all__ = ["load_config", "cli", "get_html"]

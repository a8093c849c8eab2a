"""Urban smellscape metrics from geo-tagged social media tags."""
__version__ = "0.1.0"

from .errors import SmellscapeError  # noqa: E402
from .lexicon import Lexicons, normalize  # noqa: E402

__all__ = ["Lexicons", "SmellscapeError", "normalize", "__version__"]

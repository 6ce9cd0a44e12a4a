"""Allow ``python -m ringkit``."""
import sys

from ringkit.main import main

if __name__ == "__main__":
    sys.exit(main())

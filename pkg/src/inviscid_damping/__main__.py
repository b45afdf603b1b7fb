import sys

from .harness_cli import main

sys.exit(main())

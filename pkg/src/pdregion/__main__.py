import sys

from pdregion.cli import main

sys.exit(main())

import sys

from isobn.cli import main

sys.exit(main())

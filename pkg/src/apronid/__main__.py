import sys

from apronid.cli import main

sys.exit(main())

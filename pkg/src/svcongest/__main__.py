import sys

from svcongest.cli import main

sys.exit(main())

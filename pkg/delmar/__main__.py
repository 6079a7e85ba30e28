import sys

from delmar.cli import main

sys.exit(main())

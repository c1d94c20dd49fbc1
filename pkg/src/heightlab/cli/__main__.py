import sys

from heightlab.cli.main import main

sys.exit(main())

from __future__ import annotations

import sys

from heightlab.cli.main import main

sys.exit(main())

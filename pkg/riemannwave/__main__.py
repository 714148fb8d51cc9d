import sys

from riemannwave.cli import main

sys.exit(main())

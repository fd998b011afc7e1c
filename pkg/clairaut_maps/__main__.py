import sys

from clairaut_maps.cli import main

sys.exit(main())

import sys

from geoball.cli import main

sys.exit(main())

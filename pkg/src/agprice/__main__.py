import sys

from agprice.cli import main

sys.exit(main())

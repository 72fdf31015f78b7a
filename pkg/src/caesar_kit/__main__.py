import sys

from caesar_kit.cli import main

sys.exit(main())

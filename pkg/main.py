import os
import sys

# Añadir directorio src al path
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))

from privplan.cli import main


if __name__ == "__main__":
    sys.exit(main())

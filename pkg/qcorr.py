# Local runner: python qcorr.py sweep configs/fig1_ad_nm.json

import sys

from app.main import main

if __name__ == '__main__':
    sys.exit(main())

"""Load project configurations from .env files.
Provides easy access to paths and run settings used in the project.
Meant to be used as an imported module.

If `config.py` is run on its own, it will create the appropriate
directories.

For information about the rationale behind decouple and this module,
see https://pypi.org/project/python-decouple/

Precedence is the usual decouple one: variables set in the environment
win over the ones in `.env`, which win over the defaults below. For
example, to cap matrix assembly at two threads for one run,

```bash
SPECLOG_THREADS=2 speclog solve --config data/manual/default_config.json
```
"""
from decouple import config
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent

DATA_DIR = config('DATA_DIR', default=(BASE_DIR / 'data'), cast=Path)
OUTPUT_DIR = config('OUTPUT_DIR', default=(BASE_DIR / 'output'), cast=Path)
CACHE_DIR = config('CACHE_DIR', default=(DATA_DIR / 'cache'), cast=Path)
DEFAULT_CONFIG = config(
    'DEFAULT_CONFIG',
    default=(DATA_DIR / 'manual' / 'default_config.json'),
    cast=Path,
)

# 0 means "let the solver pick", i.e. os.cpu_count()
SPECLOG_THREADS = config('SPECLOG_THREADS', default=0, cast=int)
LOG_LEVEL = config('LOG_LEVEL', default='INFO')
DEFAULT_SEED = config('DEFAULT_SEED', default=20240229, cast=int)

if __name__ == "__main__":

    ## If they don't exist, create the data and output directories
    (DATA_DIR / 'manual').mkdir(parents=True, exist_ok=True)
    CACHE_DIR.mkdir(parents=True, exist_ok=True)
    OUTPUT_DIR.mkdir(parents=True, exist_ok=True)

__version__ = "0.1.0"

from . import errors
from . import utils
from . import modules
from . import envs
from . import agents
from . import pipelines

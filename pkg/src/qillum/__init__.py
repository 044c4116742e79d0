__version__ = "0.1.0"

from qillum.utils import *
from qillum.symplectic import *
from qillum.probes import *
from qillum.closed_forms import *
from qillum.stein import *
from qillum.sweeps import *
from qillum.postprocessing import *

from .utils import *
from .evaluator import *

from .unit import *

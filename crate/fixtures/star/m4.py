"""Module whose bindings come from imports."""

import os
import os.path as osp
from collections import OrderedDict
from json import dumps as to_json

def wrap(value):
    return to_json(value)

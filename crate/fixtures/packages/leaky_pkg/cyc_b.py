"""Second half of an import cycle."""

import cyc_a

def handle(x):
    return x

def callback(x):
    return cyc_a.forward(x)

"""First half of an import cycle."""

import cyc_b

def forward(x):
    return cyc_b.handle(x)

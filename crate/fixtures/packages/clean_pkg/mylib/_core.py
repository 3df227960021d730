"""Connection internals."""

class Connection:
    def __init__(self, addr):
        self.addr = addr

def connect(addr):
    return Connection(addr)

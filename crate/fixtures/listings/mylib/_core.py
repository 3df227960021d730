"""Array internals."""

def array(data):
    return list(data)

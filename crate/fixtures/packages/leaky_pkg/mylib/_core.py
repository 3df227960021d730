"""Application internals."""

def make_app(name):
    return {"name": name}

"""Image reading internals."""

def read_image(path):
    return {"path": path}

def read_image(path):
    return {"path": path}

def array(data):
    return list(data)

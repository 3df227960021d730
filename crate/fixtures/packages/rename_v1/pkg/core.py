"""Core routines."""

def _process_impl(data):
    return list(data)

def _validate_impl(data):
    return data is not None

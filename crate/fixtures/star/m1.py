"""Plain module with no export curation."""

def run(job):
    return _execute(job)

def _execute(job):
    return job

def shutdown():
    pass

_registry = {}
limit = 10

class DatasetError(Exception):
    """Bad tensor file or manifest; the CLI maps this to exit code 2."""

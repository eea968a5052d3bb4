"""HTTP service wrapping the core package: pydantic schemas, handlers, app."""

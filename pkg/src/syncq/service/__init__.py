"""HTTP service layer: pydantic schemas and the FastAPI app."""

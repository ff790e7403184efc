from bc_compose.pydantic.load import load_pydantic_settings

settings = load_pydantic_settings()

from pydantic import BaseModel


class CacheStats(BaseModel):
    S: int
    d_h: int
    memory_elements: int

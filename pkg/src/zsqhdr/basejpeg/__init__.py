"""Legacy-decodable base layer: baseline JPEG encode/decode."""

from .decoder import decode_base, parse_quant_tables
from .encoder import SUBSAMPLING, encode_base
from .tables import quality_scale, scaled_table

__all__ = ["encode_base", "decode_base", "parse_quant_tables", "SUBSAMPLING", "quality_scale", "scaled_table"]

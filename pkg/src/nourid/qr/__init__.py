"""QR Model 2 symbol generation: Reed-Solomon ECC, masking, rendering."""

from .encode import QrSymbol, encode_qr, smallest_version
from .render import render_qr

__all__ = ["QrSymbol", "encode_qr", "smallest_version", "render_qr"]

"""Reading and writing raster images: PNG and binary PPM/PGM.

The PNG codec is self-contained on top of zlib. Decoding covers gray and
RGB at 8 and 16 bits, including alpha variants (the alpha channel is
dropped with a warning); encoding always writes filter-0 scanlines at a
fixed compression level, so identical pixels produce identical bytes,
which the CLI/service parity contract relies on.
"""

from __future__ import annotations

import struct
import warnings
import zlib

import numpy as np

from .raster import RasterImage

PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


class DecodeError(ValueError):
    """A file could not be decoded; the message names the file."""


def _chunk(tag: bytes, payload: bytes) -> bytes:
    return (
        struct.pack(">I", len(payload))
        + tag
        + payload
        + struct.pack(">I", zlib.crc32(tag + payload) & 0xFFFFFFFF)
    )


def encode_png(image: RasterImage) -> bytes:
    """Serialize to PNG bytes (deterministic: filter 0, zlib level 6)."""
    data = image.data
    color_type = 0 if image.channels == 1 else 2
    bit_depth = 8 * image.bytes_per_sample
    ihdr = struct.pack(
        ">IIBBBBB", image.width, image.height, bit_depth, color_type, 0, 0, 0
    )
    if bit_depth == 16:
        raw = data.astype(">u2").tobytes()
    else:
        raw = data.tobytes()
    stride = image.width * image.channels * image.bytes_per_sample
    lines = bytearray()
    for y in range(image.height):
        lines.append(0)
        lines += raw[y * stride : (y + 1) * stride]
    idat = zlib.compress(bytes(lines), 6)
    return (
        PNG_SIGNATURE
        + _chunk(b"IHDR", ihdr)
        + _chunk(b"IDAT", idat)
        + _chunk(b"IEND", b"")
    )


def _paeth(a: int, b: int, c: int) -> int:
    p = a + b - c
    pa, pb, pc = abs(p - a), abs(p - b), abs(p - c)
    if pa <= pb and pa <= pc:
        return a
    if pb <= pc:
        return b
    return c


def _unfilter(raw: bytes, height: int, stride: int, bpp: int) -> bytearray:
    out = bytearray(height * stride)
    prev = bytearray(stride)
    pos = 0
    for y in range(height):
        ftype = raw[pos]
        pos += 1
        line = bytearray(raw[pos : pos + stride])
        pos += stride
        if ftype == 0:
            pass
        elif ftype == 1:  # Sub
            for i in range(bpp, stride):
                line[i] = (line[i] + line[i - bpp]) & 0xFF
        elif ftype == 2:  # Up
            for i in range(stride):
                line[i] = (line[i] + prev[i]) & 0xFF
        elif ftype == 3:  # Average
            for i in range(stride):
                left = line[i - bpp] if i >= bpp else 0
                line[i] = (line[i] + ((left + prev[i]) >> 1)) & 0xFF
        elif ftype == 4:  # Paeth
            for i in range(stride):
                left = line[i - bpp] if i >= bpp else 0
                up_left = prev[i - bpp] if i >= bpp else 0
                line[i] = (line[i] + _paeth(left, prev[i], up_left)) & 0xFF
        else:
            raise ValueError(f"unknown PNG filter type {ftype}")
        out[y * stride : (y + 1) * stride] = line
        prev = line
    return out


def decode_png(blob: bytes, name: str = "<bytes>") -> RasterImage:
    """Decode a PNG byte string into a RasterImage, dropping alpha if present."""
    if blob[:8] != PNG_SIGNATURE:
        raise DecodeError(f"{name}: not a PNG file")
    pos = 8
    ihdr = None
    idat = bytearray()
    try:
        while pos < len(blob):
            length, tag = struct.unpack_from(">I4s", blob, pos)
            payload = blob[pos + 8 : pos + 8 + length]
            if len(payload) != length:
                raise DecodeError(f"{name}: truncated PNG chunk {tag!r}")
            pos += 12 + length
            if tag == b"IHDR":
                ihdr = struct.unpack(">IIBBBBB", payload)
            elif tag == b"IDAT":
                idat += payload
            elif tag == b"IEND":
                break
    except struct.error as exc:
        raise DecodeError(f"{name}: truncated PNG stream") from exc
    if ihdr is None or not idat:
        raise DecodeError(f"{name}: missing PNG image data")
    width, height, bit_depth, color_type, _, _, interlace = ihdr
    if interlace != 0:
        raise DecodeError(f"{name}: interlaced PNG is not supported")
    if bit_depth not in (8, 16):
        raise DecodeError(f"{name}: unsupported PNG bit depth {bit_depth}")
    samples = {0: 1, 2: 3, 4: 2, 6: 4}.get(color_type)
    if samples is None:
        raise DecodeError(f"{name}: unsupported PNG color type {color_type}")
    try:
        raw = zlib.decompress(bytes(idat))
    except zlib.error as exc:
        raise DecodeError(f"{name}: corrupt PNG pixel data ({exc})")
    bytes_per_sample = bit_depth // 8
    stride = width * samples * bytes_per_sample
    if len(raw) != height * (stride + 1):
        raise DecodeError(f"{name}: PNG pixel payload has wrong size")
    flat = _unfilter(raw, height, stride, samples * bytes_per_sample)
    dtype = np.dtype(">u2") if bit_depth == 16 else np.dtype("u1")
    arr = np.frombuffer(bytes(flat), dtype=dtype).reshape(height, width, samples)
    arr = arr.astype(np.uint16 if bit_depth == 16 else np.uint8)
    if color_type in (4, 6):
        warnings.warn(f"{name}: dropping alpha channel")
        arr = arr[:, :, :-1]
    return RasterImage(arr)


def encode_pnm(image: RasterImage) -> bytes:
    """Serialize to binary PGM (1 channel) or PPM (3 channels)."""
    magic = b"P5" if image.channels == 1 else b"P6"
    maxval = 255 if image.bytes_per_sample == 1 else 65535
    header = b"%s\n%d %d\n%d\n" % (magic, image.width, image.height, maxval)
    if maxval == 65535:
        body = image.data.astype(">u2").tobytes()
    else:
        body = image.data.tobytes()
    return header + body


def decode_pnm(blob: bytes, name: str = "<bytes>") -> RasterImage:
    """Decode binary PGM (P5) or PPM (P6), 8- or 16-bit big-endian."""
    if blob[:2] not in (b"P5", b"P6"):
        raise DecodeError(f"{name}: not a binary PGM/PPM file")
    channels = 1 if blob[:2] == b"P5" else 3
    pos = 2
    fields = []
    while len(fields) < 3:
        while pos < len(blob) and blob[pos : pos + 1].isspace():
            pos += 1
        if pos < len(blob) and blob[pos : pos + 1] == b"#":
            while pos < len(blob) and blob[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise DecodeError(f"{name}: truncated PNM header")
        fields.append(blob[start:pos])
    pos += 1  # single whitespace after maxval
    try:
        width, height, maxval = (int(f) for f in fields)
    except ValueError:
        raise DecodeError(f"{name}: malformed PNM header")
    if not 0 < maxval < 65536:
        raise DecodeError(f"{name}: unsupported PNM maxval {maxval}")
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height * channels
    body = blob[pos : pos + count * dtype.itemsize]
    if len(body) != count * dtype.itemsize:
        raise DecodeError(f"{name}: truncated PNM pixel data")
    arr = np.frombuffer(body, dtype=dtype).reshape(height, width, channels)
    return RasterImage(arr.astype(np.uint16 if maxval > 255 else np.uint8))


def load_image(path) -> RasterImage:
    """Load a PNG or binary PPM/PGM file into a RasterImage."""
    path = str(path)
    try:
        with open(path, "rb") as f:
            blob = f.read()
    except OSError as exc:
        raise DecodeError(f"{path}: cannot read file ({exc.strerror})") from exc
    if blob[:8] == PNG_SIGNATURE:
        return decode_png(blob, name=path)
    if blob[:2] in (b"P5", b"P6"):
        return decode_pnm(blob, name=path)
    raise DecodeError(f"{path}: unsupported image format")


def save_image(path, image: RasterImage) -> None:
    """Write a RasterImage; the format follows the file extension."""
    path = str(path)
    lower = path.lower()
    if lower.endswith(".png"):
        blob = encode_png(image)
    elif lower.endswith((".ppm", ".pgm", ".pnm")):
        blob = encode_pnm(image)
    else:
        raise ValueError(f"{path}: unsupported output extension")
    with open(path, "wb") as f:
        f.write(blob)

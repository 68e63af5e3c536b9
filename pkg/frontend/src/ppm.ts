// Decoder for the binary PPM (P6) frames the service returns. Browsers do
// not render PPM natively, but the format is three header tokens and a
// raw RGB raster, so decoding into canvas-ready RGBA is trivial.

export interface DecodedImage {
  width: number;
  height: number;
  rgba: Uint8ClampedArray<ArrayBuffer>;
}

const WHITESPACE = new Set([0x20, 0x09, 0x0a, 0x0d, 0x0b, 0x0c]);

function nextToken(data: Uint8Array, pos: number): { token: string; pos: number } {
  while (pos < data.length) {
    const byte = data[pos]!;
    if (WHITESPACE.has(byte)) {
      pos += 1;
    } else if (byte === 0x23 /* '#' */) {
      while (pos < data.length && data[pos] !== 0x0a && data[pos] !== 0x0d) pos += 1;
    } else {
      break;
    }
  }
  if (pos >= data.length) throw new Error("truncated PPM header");
  const start = pos;
  while (pos < data.length && !WHITESPACE.has(data[pos]!)) pos += 1;
  return { token: new TextDecoder().decode(data.subarray(start, pos)), pos };
}

export function decodePpm(input: ArrayBuffer | Uint8Array): DecodedImage {
  const data = input instanceof Uint8Array ? input : new Uint8Array(input);
  if (data.length < 2 || data[0] !== 0x50 /* 'P' */ || data[1] !== 0x36 /* '6' */) {
    throw new Error("not a binary PPM (P6) stream");
  }
  let pos = 2;
  const fields: number[] = [];
  for (const name of ["width", "height", "maxval"]) {
    const result = nextToken(data, pos);
    pos = result.pos;
    const value = Number(result.token);
    if (!Number.isInteger(value)) throw new Error(`bad ${name} field "${result.token}"`);
    fields.push(value);
  }
  const [width, height, maxval] = fields as [number, number, number];
  if (width < 1 || height < 1) throw new Error(`bad dimensions ${width}x${height}`);
  if (maxval < 1 || maxval > 255) throw new Error(`unsupported maxval ${maxval}`);
  pos += 1; // the single whitespace byte after maxval
  const expected = width * height * 3;
  if (data.length - pos < expected) {
    throw new Error(`raster truncated: expected ${expected} bytes`);
  }
  const rgba = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < width * height; i++) {
    rgba[i * 4] = data[pos + i * 3]!;
    rgba[i * 4 + 1] = data[pos + i * 3 + 1]!;
    rgba[i * 4 + 2] = data[pos + i * 3 + 2]!;
    rgba[i * 4 + 3] = 255;
  }
  return { width, height, rgba };
}

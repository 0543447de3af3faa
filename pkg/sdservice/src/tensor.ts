/**
 * Wire-format tensors: base64 little-endian float32 bytes in row-major
 * (C) order, channels-first, wrapped in a small JSON envelope.
 */

export interface WireTensor {
  dtype: "float32";
  shape: number[];
  data: string;
}

export interface Tensor {
  shape: number[];
  data: Float32Array;
}

export function numel(shape: number[]): number {
  return shape.reduce((a, b) => a * b, 1);
}

export function encodeTensor(t: Tensor): WireTensor {
  if (t.data.length !== numel(t.shape)) {
    throw new Error(`tensor data length ${t.data.length} does not match shape [${t.shape}]`);
  }
  // Float32Array is little-endian on every platform node supports
  const bytes = Buffer.from(t.data.buffer, t.data.byteOffset, t.data.byteLength);
  return { dtype: "float32", shape: [...t.shape], data: bytes.toString("base64") };
}

export function decodeTensor(obj: WireTensor, expectShape?: number[]): Tensor {
  if (obj.dtype !== "float32") {
    throw new Error(`unsupported tensor dtype ${obj.dtype}`);
  }
  const shape = obj.shape.map((s) => Math.trunc(s));
  const raw = Buffer.from(obj.data, "base64");
  if (raw.length !== numel(shape) * 4) {
    throw new Error(`tensor payload holds ${raw.length} bytes, shape [${shape}] needs ${numel(shape) * 4}`);
  }
  if (expectShape && !sameShape(shape, expectShape)) {
    throw new Error(`expected tensor shape [${expectShape}], got [${shape}]`);
  }
  // copy so the result owns aligned memory independent of the Buffer pool
  const data = new Float32Array(raw.length / 4);
  for (let i = 0; i < data.length; i++) {
    data[i] = raw.readFloatLE(i * 4);
  }
  return { shape, data };
}

export function sameShape(a: number[], b: number[]): boolean {
  return a.length === b.length && a.every((v, i) => v === b[i]);
}

export function zeros(shape: number[]): Tensor {
  return { shape: [...shape], data: new Float32Array(numel(shape)) };
}

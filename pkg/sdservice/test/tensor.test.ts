import { createHash } from "node:crypto";
import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { decodeTensor, encodeTensor } from "../src/tensor";

const GOLDEN_PATH = join(__dirname, "..", "..", "tests", "golden", "tensor_v1.json");

function goldenValues(): Float32Array {
  const out = new Float32Array(96);
  for (let i = 0; i < 96; i++) {
    out[i] = Math.fround(Math.sin(i) * 2.5);
  }
  return out;
}

describe("tensor codec", () => {
  it("round-trips", () => {
    const data = Float32Array.from({ length: 60 }, (_, i) => (i - 30) / 7);
    const t = { shape: [3, 4, 5], data };
    const back = decodeTensor(encodeTensor(t));
    expect(back.shape).toEqual([3, 4, 5]);
    expect(Array.from(back.data)).toEqual(Array.from(data));
  });

  it("rejects wrong payload sizes", () => {
    const obj = encodeTensor({ shape: [4], data: new Float32Array(4) });
    obj.shape = [5];
    expect(() => decodeTensor(obj)).toThrow(/bytes/);
  });

  it("rejects shape mismatches", () => {
    const obj = encodeTensor({ shape: [2, 2], data: new Float32Array(4) });
    expect(() => decodeTensor(obj, [2, 3])).toThrow(/shape/);
  });

  it("matches the cross-component golden file byte for byte", () => {
    const golden = JSON.parse(readFileSync(GOLDEN_PATH, "utf-8"));
    const encoded = encodeTensor({ shape: [2, 3, 4, 4], data: goldenValues() });
    expect(encoded.dtype).toBe(golden.tensor.dtype);
    expect(encoded.shape).toEqual(golden.tensor.shape);
    expect(encoded.data).toBe(golden.tensor.data);

    const raw = Buffer.from(encoded.data, "base64");
    const sha = createHash("sha256").update(raw).digest("hex");
    expect(sha).toBe(golden.sha256_raw_bytes);
  });

  it("decodes the golden payload to the reference values", () => {
    const golden = JSON.parse(readFileSync(GOLDEN_PATH, "utf-8"));
    const back = decodeTensor(golden.tensor);
    const want = goldenValues();
    expect(back.shape).toEqual([2, 3, 4, 4]);
    for (let i = 0; i < want.length; i++) {
      expect(back.data[i]).toBe(want[i]);
    }
  });
});

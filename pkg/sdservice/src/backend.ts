/**
 * Model backend. The real deployment would wrap pretrained latent
 * diffusion + depth/lineart ControlNet weights here; this build ships a
 * deterministic procedural stand-in with the same interface and tensor
 * contract: an 8x downsampling linear codec, and a noise predictor whose
 * clean-latent target is derived from the prompt hash and the per-view
 * conditioning images. Every operation is a pure function of its inputs
 * and the session seed, so repeated calls are bit-identical.
 */

import { Schedule } from "./schedule";
import { Tensor, numel } from "./tensor";

export const VAE_FACTOR = 8;
export const LATENT_CHANNELS = 4;

export interface BackendSession {
  seed: number;
  prompt: string;
  imageSize: number;
  latentSize: number;
  controlnetWeights: [number, number];
}

/* ------------------------------------------------------------------ */
/* deterministic parameter derivation                                  */

function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

/** splitmix32: tiny deterministic PRNG for parameter derivation. */
function splitmix32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x9e3779b9) >>> 0;
    let z = state;
    z ^= z >>> 16;
    z = Math.imul(z, 0x21f0aaad) >>> 0;
    z ^= z >>> 15;
    z = Math.imul(z, 0x735a2d97) >>> 0;
    z ^= z >>> 15;
    return (z >>> 0) / 0x100000000;
  };
}

interface ChannelPattern {
  freqU: number;
  freqV: number;
  phaseU: number;
  phaseV: number;
  base: number;
  amp: number;
  lineGain: number;
}

export function promptPatterns(prompt: string, seed: number): ChannelPattern[] {
  const rand = splitmix32((fnv1a(prompt) ^ Math.imul(seed, 0x9e3779b1)) >>> 0);
  const patterns: ChannelPattern[] = [];
  for (let c = 0; c < 3; c++) {
    patterns.push({
      freqU: 1 + Math.floor(rand() * 4),
      freqV: 1 + Math.floor(rand() * 4),
      phaseU: rand() * 2 * Math.PI,
      phaseV: rand() * 2 * Math.PI,
      base: -0.2 + 0.4 * rand(),
      amp: 0.3 + 0.4 * rand(),
      lineGain: 0.2 + 0.3 * rand(),
    });
  }
  return patterns;
}

/* ------------------------------------------------------------------ */
/* linear codec                                                        */

/** Area-downsample (V, 3, H, W) images to (V, 4, H/8, W/8) latents;
 * the fourth channel carries the RGB mean. */
export function vaeEncode(images: Tensor, imageSize: number): Tensor {
  const [v, c, h, w] = images.shape;
  if (c !== 3 || h !== imageSize || w !== imageSize) {
    throw new Error(`expected (V, 3, ${imageSize}, ${imageSize}) images, got [${images.shape}]`);
  }
  const ls = imageSize / VAE_FACTOR;
  const out = new Float32Array(v * LATENT_CHANNELS * ls * ls);
  const src = images.data;
  for (let view = 0; view < v; view++) {
    for (let ch = 0; ch < 3; ch++) {
      const inBase = (view * 3 + ch) * h * w;
      const outBase = (view * LATENT_CHANNELS + ch) * ls * ls;
      for (let y = 0; y < ls; y++) {
        for (let x = 0; x < ls; x++) {
          let acc = 0;
          for (let dy = 0; dy < VAE_FACTOR; dy++) {
            const row = inBase + (y * VAE_FACTOR + dy) * w + x * VAE_FACTOR;
            for (let dx = 0; dx < VAE_FACTOR; dx++) acc += src[row + dx];
          }
          out[outBase + y * ls + x] = acc / (VAE_FACTOR * VAE_FACTOR);
        }
      }
    }
    // channel 3 = mean of the RGB latents
    const meanBase = (view * LATENT_CHANNELS + 3) * ls * ls;
    for (let i = 0; i < ls * ls; i++) {
      let acc = 0;
      for (let ch = 0; ch < 3; ch++) {
        acc += out[(view * LATENT_CHANNELS + ch) * ls * ls + i];
      }
      out[meanBase + i] = acc / 3;
    }
  }
  return { shape: [v, LATENT_CHANNELS, ls, ls], data: out };
}

/** Bilinear (half-pixel aligned) upsample of latent channels 0..2 back
 * to (V, 3, H, W). */
export function vaeDecode(z: Tensor, imageSize: number): Tensor {
  const [v, c, lh, lw] = z.shape;
  if (c !== LATENT_CHANNELS || lh * VAE_FACTOR !== imageSize || lw * VAE_FACTOR !== imageSize) {
    throw new Error(`expected (V, ${LATENT_CHANNELS}, ${imageSize / VAE_FACTOR}, ${imageSize / VAE_FACTOR}) latents, got [${z.shape}]`);
  }
  const out = new Float32Array(v * 3 * imageSize * imageSize);
  const scale = lw / imageSize;
  for (let view = 0; view < v; view++) {
    for (let ch = 0; ch < 3; ch++) {
      const inBase = (view * LATENT_CHANNELS + ch) * lh * lw;
      const outBase = (view * 3 + ch) * imageSize * imageSize;
      for (let y = 0; y < imageSize; y++) {
        const sy = Math.min(Math.max((y + 0.5) * scale - 0.5, 0), lh - 1);
        const y0 = Math.min(Math.floor(sy), lh - 2 >= 0 ? lh - 2 : 0);
        const fy = sy - y0;
        for (let x = 0; x < imageSize; x++) {
          const sx = Math.min(Math.max((x + 0.5) * scale - 0.5, 0), lw - 1);
          const x0 = Math.min(Math.floor(sx), lw - 2 >= 0 ? lw - 2 : 0);
          const fx = sx - x0;
          const i00 = z.data[inBase + y0 * lw + x0];
          const i01 = z.data[inBase + y0 * lw + x0 + 1];
          const i10 = z.data[inBase + (y0 + 1) * lw + x0];
          const i11 = z.data[inBase + (y0 + 1) * lw + x0 + 1];
          out[outBase + y * imageSize + x] =
            (1 - fy) * ((1 - fx) * i00 + fx * i01) + fy * ((1 - fx) * i10 + fx * i11);
        }
      }
    }
  }
  return { shape: [v, 3, imageSize, imageSize], data: out };
}

/* ------------------------------------------------------------------ */
/* noise prediction                                                    */

/** Pool a (V, H, W) condition map to latent resolution by block mean. */
function poolCondition(cond: Tensor, latentSize: number): Float32Array {
  const [v, h, w] = cond.shape;
  const f = h / latentSize;
  const out = new Float32Array(v * latentSize * latentSize);
  for (let view = 0; view < v; view++) {
    const inBase = view * h * w;
    const outBase = view * latentSize * latentSize;
    for (let y = 0; y < latentSize; y++) {
      for (let x = 0; x < latentSize; x++) {
        let acc = 0;
        for (let dy = 0; dy < f; dy++) {
          const row = inBase + (y * f + dy) * w + x * f;
          for (let dx = 0; dx < f; dx++) acc += cond.data[row + dx];
        }
        out[outBase + y * latentSize + x] = acc / (f * f);
      }
    }
  }
  return out;
}

/**
 * Clean-latent target for each view: the prompt-derived color lattice
 * gated by the depth condition (background depth 0 maps to the empty
 * latent) with lineart adding edge emphasis. ControlNet weights scale
 * the two conditioning contributions.
 */
export function cleanLatentTarget(
  session: BackendSession,
  depth: Tensor,
  lineart: Tensor,
): Tensor {
  const ls = session.latentSize;
  const v = depth.shape[0];
  const patterns = promptPatterns(session.prompt, session.seed);
  const [wDepth, wLine] = session.controlnetWeights;
  const depthP = poolCondition(depth, ls);
  const lineP = poolCondition(lineart, ls);
  const out = new Float32Array(v * LATENT_CHANNELS * ls * ls);
  for (let view = 0; view < v; view++) {
    const condBase = view * ls * ls;
    for (let y = 0; y < ls; y++) {
      for (let x = 0; x < ls; x++) {
        const i = condBase + y * ls + x;
        const gate = Math.min(1, 2 * wDepth * depthP[i]);
        const edge = wLine * lineP[i];
        let rgbAcc = 0;
        for (let ch = 0; ch < 3; ch++) {
          const p = patterns[ch];
          const value =
            p.base +
            p.amp *
              Math.sin((2 * Math.PI * p.freqU * (x + 0.5)) / ls + p.phaseU) *
              Math.sin((2 * Math.PI * p.freqV * (y + 0.5)) / ls + p.phaseV) +
            p.lineGain * edge;
          const gated = gate * Math.max(-0.95, Math.min(0.95, value));
          out[(view * LATENT_CHANNELS + ch) * ls * ls + y * ls + x] = gated;
          rgbAcc += gated;
        }
        out[(view * LATENT_CHANNELS + 3) * ls * ls + y * ls + x] = rgbAcc / 3;
      }
    }
  }
  return { shape: [v, LATENT_CHANNELS, ls, ls], data: out };
}

/** eps prediction: the exact noise direction between z_t and the
 * procedural clean target, (z_t - alpha_t * target) / sigma_t. */
export function predictNoise(
  session: BackendSession,
  schedule: Schedule,
  zT: Tensor,
  t: number,
  depth: Tensor,
  lineart: Tensor,
): Tensor {
  if (t < 1 || t >= schedule.sigma.length) {
    throw new Error(`timestep ${t} outside schedule range`);
  }
  const target = cleanLatentTarget(session, depth, lineart);
  if (numel(target.shape) !== numel(zT.shape)) {
    throw new Error(`latent shape [${zT.shape}] does not match conditions [${target.shape}]`);
  }
  const alpha = schedule.alpha[t];
  const sigma = schedule.sigma[t];
  const out = new Float32Array(zT.data.length);
  for (let i = 0; i < out.length; i++) {
    out[i] = (zT.data[i] - alpha * target.data[i]) / sigma;
  }
  return { shape: [...zT.shape], data: out };
}

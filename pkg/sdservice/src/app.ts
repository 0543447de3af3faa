/**
 * HTTP surface of the denoiser service.
 *
 *   POST /v1/session        open a session, returns latent shape + sigma table
 *   POST /v1/predict_noise  eps for a view batch given z_t and conditions
 *   POST /v1/encode         images -> latents
 *   POST /v1/decode         latents -> images
 *   GET  /v1/health         liveness + backend identification
 *
 * Requests for one session are serialized FIFO through a per-session
 * promise chain; malformed shapes get 400, unknown sessions 404.
 */

import express, { Express, Request, Response } from "express";

import {
  BackendSession,
  LATENT_CHANNELS,
  VAE_FACTOR,
  cleanLatentTarget,
  predictNoise,
  vaeDecode,
  vaeEncode,
} from "./backend";
import { Schedule, makeSchedule, sigmaTable } from "./schedule";
import { decodeTensor, encodeTensor, sameShape } from "./tensor";

const MODEL_NAME = "procedural-v1 (deterministic stand-in; depth+lineart conditioned)";
const GUIDANCE_SCALE = 7.5; // documented default, not exercised by the stand-in

interface SessionState {
  id: string;
  backend: BackendSession;
  schedule: Schedule;
  nViews: number;
  queue: Promise<unknown>;
}

export interface ServiceOptions {
  totalSteps?: number;
  bodyLimit?: string;
}

class HttpError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export function createApp(options: ServiceOptions = {}): Express {
  const app = express();
  app.use(express.json({ limit: options.bodyLimit ?? "512mb" }));
  const sessions = new Map<string, SessionState>();
  let nextSession = 1;

  const getSession = (id: unknown): SessionState => {
    const session = sessions.get(String(id));
    if (!session) throw new HttpError(404, `unknown session ${id}`);
    return session;
  };

  /** Serialize handler work per session (FIFO). */
  const enqueue = <T>(session: SessionState, work: () => T): Promise<T> => {
    const next = session.queue.then(work);
    session.queue = next.catch(() => undefined);
    return next;
  };

  const handle = (fn: (req: Request) => unknown) =>
    async (req: Request, res: Response) => {
      try {
        const reply = await fn(req);
        res.json(reply);
      } catch (err) {
        if (err instanceof HttpError) {
          res.status(err.status).json({ error: err.message });
        } else {
          res.status(400).json({ error: String((err as Error).message ?? err) });
        }
      }
    };

  app.get("/v1/health", (_req, res) => {
    res.json({ status: "ok", model: MODEL_NAME, sessions: sessions.size });
  });

  app.post("/v1/session", handle((req) => {
    const { prompt, image_size, n_views, controlnet_weights, seed } = req.body;
    const imageSize = Math.trunc(image_size);
    if (!Number.isFinite(imageSize) || imageSize < VAE_FACTOR || imageSize % VAE_FACTOR) {
      throw new HttpError(400, `image_size must be a positive multiple of ${VAE_FACTOR}`);
    }
    const nViews = Math.trunc(n_views);
    if (!Number.isFinite(nViews) || nViews < 1) {
      throw new HttpError(400, "n_views must be >= 1");
    }
    const weights: [number, number] = Array.isArray(controlnet_weights)
      ? [Number(controlnet_weights[0] ?? 0.5), Number(controlnet_weights[1] ?? 0.5)]
      : [0.5, 0.5];
    const schedule = makeSchedule(options.totalSteps ?? 1000);
    const id = `sess-${nextSession++}`;
    const latentSize = imageSize / VAE_FACTOR;
    sessions.set(id, {
      id,
      backend: {
        seed: Math.trunc(seed ?? 0),
        prompt: String(prompt ?? ""),
        imageSize,
        latentSize,
        controlnetWeights: weights,
      },
      schedule,
      nViews,
      queue: Promise.resolve(),
    });
    return {
      session_id: id,
      latent_shape: [LATENT_CHANNELS, latentSize, latentSize],
      sigma_table: sigmaTable(schedule),
      model: MODEL_NAME,
      guidance_scale: GUIDANCE_SCALE,
    };
  }));

  app.post("/v1/predict_noise", handle((req) => {
    const session = getSession(req.body.session_id);
    return enqueue(session, () => {
      const t = Math.trunc(req.body.t);
      const viewIds: number[] = (req.body.view_ids ?? []).map((v: unknown) => Math.trunc(Number(v)));
      if (viewIds.some((v) => v < 0 || v >= session.nViews)) {
        throw new HttpError(400, `view ids must lie in [0, ${session.nViews})`);
      }
      const ls = session.backend.latentSize;
      const zT = decodeTensor(req.body.z_t, [viewIds.length, LATENT_CHANNELS, ls, ls]);
      const condShape = [viewIds.length, session.backend.imageSize, session.backend.imageSize];
      const depth = decodeTensor(req.body.depth, condShape);
      const lineart = decodeTensor(req.body.lineart, condShape);
      const eps = predictNoise(session.backend, session.schedule, zT, t, depth, lineart);
      return { eps: encodeTensor(eps) };
    });
  }));

  app.post("/v1/encode", handle((req) => {
    const session = getSession(req.body.session_id);
    return enqueue(session, () => {
      const images = decodeTensor(req.body.images);
      const size = session.backend.imageSize;
      if (images.shape.length !== 4 || !sameShape(images.shape.slice(1), [3, size, size])) {
        throw new HttpError(400, `expected (V, 3, ${size}, ${size}) images, got [${images.shape}]`);
      }
      return { z: encodeTensor(vaeEncode(images, size)) };
    });
  }));

  app.post("/v1/decode", handle((req) => {
    const session = getSession(req.body.session_id);
    return enqueue(session, () => {
      const z = decodeTensor(req.body.z);
      const ls = session.backend.latentSize;
      if (z.shape.length !== 4 || !sameShape(z.shape.slice(1), [LATENT_CHANNELS, ls, ls])) {
        throw new HttpError(400, `expected (V, ${LATENT_CHANNELS}, ${ls}, ${ls}) latents, got [${z.shape}]`);
      }
      return { images: encodeTensor(vaeDecode(z, session.backend.imageSize)) };
    });
  }));

  return app;
}

export { cleanLatentTarget };

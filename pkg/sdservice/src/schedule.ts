/**
 * The model's variance schedule: a scaled-linear beta ramp whose first
 * beta pins sigma_1 and whose last beta is bisected so sigma_T hits the
 * requested terminal noise level. Exported to clients as (t, sigma)
 * pairs so both sides share one table bit-exactly.
 */

export interface Schedule {
  /** sigma[t] for t = 0..T with sigma[0] = 0 */
  sigma: Float64Array;
  alpha: Float64Array;
}

export function makeSchedule(
  totalSteps = 1000,
  sigmaMin = 0.01,
  sigmaMax = 0.9985,
): Schedule {
  if (totalSteps < 2) throw new Error("totalSteps must be >= 2");
  if (!(sigmaMin > 0 && sigmaMin < sigmaMax && sigmaMax < 1)) {
    throw new Error("need 0 < sigmaMin < sigmaMax < 1");
  }
  const beta1 = sigmaMin * sigmaMin;
  const logTarget = Math.log1p(-sigmaMax * sigmaMax);

  const logProd = (betaEnd: number): number => {
    let acc = 0;
    const r1 = Math.sqrt(beta1);
    const rEnd = Math.sqrt(betaEnd);
    for (let s = 0; s < totalSteps; s++) {
      const root = r1 + ((rEnd - r1) * s) / (totalSteps - 1);
      acc += Math.log1p(-root * root);
    }
    return acc;
  };

  // logProd is strictly decreasing in betaEnd: bisect to the target
  let lo = 1e-12;
  let hi = 1 - 1e-9;
  if (logProd(lo) < logTarget) {
    throw new Error("sigma endpoints unreachable with this step count");
  }
  for (let i = 0; i < 200; i++) {
    const mid = 0.5 * (lo + hi);
    if (logProd(mid) > logTarget) lo = mid;
    else hi = mid;
  }
  const betaEnd = 0.5 * (lo + hi);

  const sigma = new Float64Array(totalSteps + 1);
  const alpha = new Float64Array(totalSteps + 1);
  sigma[0] = 0;
  alpha[0] = 1;
  let alphaBar = 1;
  const r1 = Math.sqrt(beta1);
  const rEnd = Math.sqrt(betaEnd);
  for (let s = 0; s < totalSteps; s++) {
    const root = r1 + ((rEnd - r1) * s) / (totalSteps - 1);
    alphaBar *= 1 - root * root;
    sigma[s + 1] = Math.sqrt(1 - alphaBar);
    alpha[s + 1] = Math.sqrt(alphaBar);
  }
  return { sigma, alpha };
}

/** (t, sigma_t) pairs for the session reply, t = 1..T. */
export function sigmaTable(schedule: Schedule): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  for (let t = 1; t < schedule.sigma.length; t++) {
    out.push([t, schedule.sigma[t]]);
  }
  return out;
}

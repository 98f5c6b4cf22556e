// Split-step Schrodinger kernel mirroring the server's numerics in float64.
// Complex arrays are stored as separate re/im Float64Arrays; the FFT is an
// in-place iterative radix-2 Cooley-Tukey with the same sign conventions as
// numpy/scipy (forward: exp(-2 pi i k n / N), inverse scaled by 1/N).

export interface GridSpec {
  x_min: number;
  x_max: number;
  n_points: number;
}

export interface TrapSpec {
  x0: number;
  amplitude: number;
  waist: number;
}

export class Grid {
  readonly n: number;
  readonly dx: number;
  readonly x: Float64Array;
  readonly k: Float64Array;

  constructor(spec: GridSpec) {
    const n = spec.n_points;
    if (n < 64 || (n & (n - 1)) !== 0) {
      throw new Error(`n_points must be a power of two >= 64, got ${n}`);
    }
    this.n = n;
    this.dx = (spec.x_max - spec.x_min) / n;
    this.x = new Float64Array(n);
    this.k = new Float64Array(n);
    for (let i = 0; i < n; i++) {
      this.x[i] = spec.x_min + i * this.dx;
      const m = i < n / 2 ? i : i - n;
      this.k[i] = (2 * Math.PI * m) / (n * this.dx);
    }
  }
}

/** In-place FFT; set inverse for the 1/N-scaled inverse transform. */
export function fft(re: Float64Array, im: Float64Array, inverse = false): void {
  const n = re.length;
  // bit-reversal permutation
  for (let i = 1, j = 0; i < n; i++) {
    let bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      [re[i], re[j]] = [re[j], re[i]];
      [im[i], im[j]] = [im[j], im[i]];
    }
  }
  for (let len = 2; len <= n; len <<= 1) {
    const ang = ((inverse ? 2 : -2) * Math.PI) / len;
    const wRe = Math.cos(ang);
    const wIm = Math.sin(ang);
    for (let i = 0; i < n; i += len) {
      let curRe = 1.0;
      let curIm = 0.0;
      for (let j = 0; j < len / 2; j++) {
        const a = i + j;
        const b = i + j + len / 2;
        const tRe = re[b] * curRe - im[b] * curIm;
        const tIm = re[b] * curIm + im[b] * curRe;
        re[b] = re[a] - tRe;
        im[b] = im[a] - tIm;
        re[a] += tRe;
        im[a] += tIm;
        const nextRe = curRe * wRe - curIm * wIm;
        curIm = curRe * wIm + curIm * wRe;
        curRe = nextRe;
      }
    }
  }
  if (inverse) {
    for (let i = 0; i < n; i++) {
      re[i] /= n;
      im[i] /= n;
    }
  }
}

export function gaussianWell(x: Float64Array, trap: TrapSpec): Float64Array {
  const v = new Float64Array(x.length);
  const w2 = trap.waist * trap.waist;
  for (let i = 0; i < x.length; i++) {
    const d = x[i] - trap.x0;
    v[i] = trap.amplitude * Math.exp((-2 * d * d) / w2);
  }
  return v;
}

export class Wavefunction {
  constructor(
    readonly grid: Grid,
    readonly re: Float64Array,
    readonly im: Float64Array,
  ) {}

  static zero(grid: Grid): Wavefunction {
    return new Wavefunction(grid, new Float64Array(grid.n), new Float64Array(grid.n));
  }

  clone(): Wavefunction {
    return new Wavefunction(this.grid, this.re.slice(), this.im.slice());
  }

  normSq(): number {
    let s = 0;
    for (let i = 0; i < this.grid.n; i++) s += this.re[i] ** 2 + this.im[i] ** 2;
    return s * this.grid.dx;
  }

  normalize(): void {
    const s = Math.sqrt(this.normSq());
    for (let i = 0; i < this.grid.n; i++) {
      this.re[i] /= s;
      this.im[i] /= s;
    }
  }

  density(): Float64Array {
    const d = new Float64Array(this.grid.n);
    for (let i = 0; i < this.grid.n; i++) d[i] = this.re[i] ** 2 + this.im[i] ** 2;
    return d;
  }
}

/** |<chi|psi>|^2 with the dx quadrature weight. */
export function fidelity(psi: Wavefunction, chi: Wavefunction): number {
  let accRe = 0;
  let accIm = 0;
  for (let i = 0; i < psi.grid.n; i++) {
    // conj(chi) * psi
    accRe += chi.re[i] * psi.re[i] + chi.im[i] * psi.im[i];
    accIm += chi.re[i] * psi.im[i] - chi.im[i] * psi.re[i];
  }
  accRe *= psi.grid.dx;
  accIm *= psi.grid.dx;
  return accRe * accRe + accIm * accIm;
}

export class SplitStepper {
  private readonly kinRe: Float64Array;
  private readonly kinIm: Float64Array;

  constructor(
    readonly grid: Grid,
    readonly dt: number,
    readonly staticPotential: Float64Array,
    readonly tweezerWaist: number,
  ) {
    this.kinRe = new Float64Array(grid.n);
    this.kinIm = new Float64Array(grid.n);
    for (let i = 0; i < grid.n; i++) {
      const phase = -0.5 * dt * grid.k[i] * grid.k[i];
      this.kinRe[i] = Math.cos(phase);
      this.kinIm[i] = Math.sin(phase);
    }
  }

  /** One Strang step from control sample (x0a, ampA) to (x0b, ampB);
   * the potential uses the control midpoint, matching the server. */
  step(psi: Wavefunction, x0a: number, ampA: number, x0b: number, ampB: number): void {
    const n = this.grid.n;
    const xm = 0.5 * (x0a + x0b);
    const am = 0.5 * (ampA + ampB);
    const w2 = this.tweezerWaist * this.tweezerWaist;
    const { re, im } = psi;
    const phRe = new Float64Array(n);
    const phIm = new Float64Array(n);
    for (let i = 0; i < n; i++) {
      const d = this.grid.x[i] - xm;
      const v = this.staticPotential[i] + am * Math.exp((-2 * d * d) / w2);
      const phase = -0.5 * this.dt * v;
      phRe[i] = Math.cos(phase);
      phIm[i] = Math.sin(phase);
    }
    applyPhase(re, im, phRe, phIm);
    fft(re, im, false);
    applyPhase(re, im, this.kinRe, this.kinIm);
    fft(re, im, true);
    applyPhase(re, im, phRe, phIm);
  }
}

function applyPhase(re: Float64Array, im: Float64Array, pRe: Float64Array, pIm: Float64Array): void {
  for (let i = 0; i < re.length; i++) {
    const r = re[i] * pRe[i] - im[i] * pIm[i];
    im[i] = re[i] * pIm[i] + im[i] * pRe[i];
    re[i] = r;
  }
}

/** Ground state by imaginary-time split-step relaxation (deterministic
 * gaussian start centered at the potential minimum).  The imaginary time
 * step anneals downward so the Trotter bias of the converged state drops
 * to ~1e-9, matching the reference implementation's diagonalized states
 * well below the client-server agreement tolerance. */
export function groundState(
  grid: Grid,
  potential: Float64Array,
  dtaus: number[] = [2e-3, 5e-4, 1e-4, 2e-5],
  tol = 1e-13,
  maxStepsPerLevel = 60000,
): Wavefunction {
  const n = grid.n;
  let iMin = 0;
  for (let i = 1; i < n; i++) if (potential[i] < potential[iMin]) iMin = i;
  const psi = Wavefunction.zero(grid);
  for (let i = 0; i < n; i++) {
    const d = grid.x[i] - grid.x[iMin];
    psi.re[i] = Math.exp(-d * d);
  }
  psi.normalize();
  const kinDecay = new Float64Array(n);
  const halfDecay = new Float64Array(n);
  const prev = new Float64Array(n);
  for (const dtau of dtaus) {
    for (let i = 0; i < n; i++) {
      kinDecay[i] = Math.exp(-0.5 * dtau * grid.k[i] * grid.k[i]);
      halfDecay[i] = Math.exp(-0.5 * dtau * potential[i]);
    }
    for (let s = 0; s < maxStepsPerLevel; s++) {
      prev.set(psi.re);
      for (let i = 0; i < n; i++) {
        psi.re[i] *= halfDecay[i];
        psi.im[i] *= halfDecay[i];
      }
      fft(psi.re, psi.im, false);
      for (let i = 0; i < n; i++) {
        psi.re[i] *= kinDecay[i];
        psi.im[i] *= kinDecay[i];
      }
      fft(psi.re, psi.im, true);
      for (let i = 0; i < n; i++) {
        psi.re[i] *= halfDecay[i];
        psi.im[i] *= halfDecay[i];
      }
      psi.normalize();
      let delta = 0;
      for (let i = 0; i < n; i++) delta = Math.max(delta, Math.abs(psi.re[i] - prev[i]));
      if (delta < tol * Math.max(1, dtau / dtaus[dtaus.length - 1])) break;
    }
  }
  return psi;
}

/** <psi|H|psi> with the spectral kinetic operator (diagnostics only). */
export function energy(psi: Wavefunction, potential: Float64Array): number {
  const n = psi.grid.n;
  const re = psi.re.slice();
  const im = psi.im.slice();
  fft(re, im, false);
  for (let i = 0; i < n; i++) {
    const k2 = 0.5 * psi.grid.k[i] * psi.grid.k[i];
    re[i] *= k2;
    im[i] *= k2;
  }
  fft(re, im, true);
  let acc = 0;
  for (let i = 0; i < n; i++) {
    acc += psi.re[i] * (re[i] + potential[i] * psi.re[i]);
    acc += psi.im[i] * (im[i] + potential[i] * psi.im[i]);
  }
  return acc * psi.grid.dx;
}

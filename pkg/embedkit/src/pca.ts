/**
 * Principal-component reduction of an embedding corpus to a shared target
 * dimension. The fitted projection (mean + component rows) is persisted as
 * JSON so drugs added later embed consistently with the original fit.
 *
 * Eigen decomposition is cyclic Jacobi on a symmetric matrix; when the
 * corpus has fewer rows than native dimensions the Gram-matrix form is
 * used, so the decomposed matrix is never larger than min(n, D)^2.
 */

export interface PcaModel {
  kind: "identity" | "projection";
  nativeDim: number;
  targetDim: number;
  mean: number[];
  /** targetDim rows of length nativeDim */
  components: number[][];
  explainedVariance: number[];
}

/** Cyclic Jacobi eigendecomposition of a symmetric matrix (in-place copy). */
export function jacobiEigen(matrix: number[][]): { values: number[]; vectors: number[][] } {
  const n = matrix.length;
  const a = matrix.map((row) => [...row]);
  const v: number[][] = Array.from({ length: n }, (_, i) =>
    Array.from({ length: n }, (_, j) => (i === j ? 1.0 : 0.0)),
  );
  for (let sweep = 0; sweep < 100; sweep++) {
    let off = 0;
    for (let p = 0; p < n; p++) {
      for (let q = p + 1; q < n; q++) off += a[p][q] * a[p][q];
    }
    if (off < 1e-22 * n * n) break;
    for (let p = 0; p < n; p++) {
      for (let q = p + 1; q < n; q++) {
        if (Math.abs(a[p][q]) < 1e-300) continue;
        const theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const t = Math.sign(theta || 1) / (Math.abs(theta) + Math.sqrt(theta * theta + 1));
        const c = 1 / Math.sqrt(t * t + 1);
        const s = t * c;
        for (let k = 0; k < n; k++) {
          const akp = a[k][p];
          const akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (let k = 0; k < n; k++) {
          const apk = a[p][k];
          const aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (let k = 0; k < n; k++) {
          const vkp = v[k][p];
          const vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }
  const values = a.map((row, i) => row[i]);
  const vectors = Array.from({ length: n }, (_, col) => v.map((row) => row[col]));
  return { values, vectors }; // vectors[k] is the k-th eigenvector
}

function meanVector(rows: number[][]): number[] {
  const dim = rows[0].length;
  const mean = new Array<number>(dim).fill(0);
  for (const row of rows) for (let j = 0; j < dim; j++) mean[j] += row[j];
  for (let j = 0; j < dim; j++) mean[j] /= rows.length;
  return mean;
}

/** Deterministic sign: make the largest-magnitude entry positive. */
function fixSign(component: number[]): number[] {
  let argmax = 0;
  for (let j = 1; j < component.length; j++) {
    if (Math.abs(component[j]) > Math.abs(component[argmax])) argmax = j;
  }
  return component[argmax] < 0 ? component.map((x) => -x) : component;
}

export function fitPca(rows: number[][], targetDim: number): PcaModel {
  if (rows.length === 0) throw new Error("cannot fit a projection on an empty corpus");
  const nativeDim = rows[0].length;
  if (targetDim < 1) throw new Error(`target dimension must be >= 1, got ${targetDim}`);
  if (nativeDim === targetDim) {
    return {
      kind: "identity",
      nativeDim,
      targetDim,
      mean: new Array<number>(nativeDim).fill(0),
      components: [],
      explainedVariance: [],
    };
  }
  if (rows.length < targetDim) {
    throw new Error(
      `too few samples: ${rows.length} rows cannot support a ${targetDim}-dimension projection`,
    );
  }
  const n = rows.length;
  const mean = meanVector(rows);
  const centered = rows.map((row) => row.map((x, j) => x - mean[j]));

  let values: number[];
  let components: number[][];
  if (n < nativeDim) {
    // Gram trick: eigenvectors of X Xt lift to components Xt u / |Xt u|
    const gram = Array.from({ length: n }, (_, i) =>
      Array.from({ length: n }, (_, j) => {
        let dot = 0;
        for (let k = 0; k < nativeDim; k++) dot += centered[i][k] * centered[j][k];
        return dot / (n - 1);
      }),
    );
    const eig = jacobiEigen(gram);
    const order = eig.values.map((value, i) => ({ value, i })).sort((a, b) => b.value - a.value);
    values = order.map(({ value }) => value);
    components = order.map(({ i }) => {
      const u = eig.vectors[i];
      const comp = new Array<number>(nativeDim).fill(0);
      for (let r = 0; r < n; r++) {
        for (let k = 0; k < nativeDim; k++) comp[k] += u[r] * centered[r][k];
      }
      const norm = Math.hypot(...comp);
      return norm > 0 ? comp.map((x) => x / norm) : comp;
    });
  } else {
    const cov = Array.from({ length: nativeDim }, (_, i) =>
      Array.from({ length: nativeDim }, (_, j) => {
        let dot = 0;
        for (const row of centered) dot += row[i] * row[j];
        return dot / (n - 1);
      }),
    );
    const eig = jacobiEigen(cov);
    const order = eig.values.map((value, i) => ({ value, i })).sort((a, b) => b.value - a.value);
    values = order.map(({ value }) => value);
    components = order.map(({ i }) => [...eig.vectors[i]]);
  }

  const totalVariance = values.reduce((acc, x) => acc + Math.max(x, 0), 0);
  const usable = values.filter((x) => x > 1e-12 * Math.max(totalVariance, 1)).length;
  if (usable < targetDim) {
    throw new Error(
      `too few samples: corpus rank ${usable} cannot support a ${targetDim}-dimension projection`,
    );
  }
  return {
    kind: "projection",
    nativeDim,
    targetDim,
    mean,
    components: components.slice(0, targetDim).map(fixSign),
    explainedVariance: values.slice(0, targetDim),
  };
}

export function project(model: PcaModel, vector: ArrayLike<number>): number[] {
  if (vector.length !== model.nativeDim) {
    throw new Error(`vector dim ${vector.length} != fitted native dim ${model.nativeDim}`);
  }
  if (model.kind === "identity") return Array.from(vector as ArrayLike<number>);
  return model.components.map((component) => {
    let dot = 0;
    for (let j = 0; j < model.nativeDim; j++) dot += component[j] * (vector[j] - model.mean[j]);
    return dot;
  });
}

/** Reconstruction in the native space, for round-trip diagnostics. */
export function reconstruct(model: PcaModel, reduced: number[]): number[] {
  if (model.kind === "identity") return [...reduced];
  const out = [...model.mean];
  reduced.forEach((coef, k) => {
    for (let j = 0; j < model.nativeDim; j++) out[j] += coef * model.components[k][j];
  });
  return out;
}

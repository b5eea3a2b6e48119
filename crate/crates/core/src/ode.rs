//! Dormand-Prince 8(5,3) integrator with 7th-order dense output, following
//! Hairer's DOP853. Forward integration only.

// tableau coefficients are kept exactly as published
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

/// Step-size control settings.
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step size; `None` means the whole interval.
    pub h_max: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-11,
            abs_tol: 1e-12,
            h_max: None,
            max_steps: 200_000,
        }
    }
}

/// Dense-output coefficients of one accepted step.
#[derive(Clone, Debug)]
struct DenseStep {
    t0: f64,
    h: f64,
    /// `8 * dim` interpolation coefficients, `cont[k * dim + i]`.
    cont: Vec<f64>,
}

/// Continuous solution over `[t0, t1]`.
#[derive(Clone, Debug)]
pub struct DenseSolution {
    dim: usize,
    t0: f64,
    t1: f64,
    steps: Vec<DenseStep>,
    y0: Vec<f64>,
    y1: Vec<f64>,
    pub rejected: usize,
    pub evaluations: usize,
}

impl DenseSolution {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn span(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn accepted(&self) -> usize {
        self.steps.len()
    }

    /// Exact initial value.
    pub fn start(&self) -> &[f64] {
        &self.y0
    }

    /// Final value of the last accepted step.
    pub fn end(&self) -> &[f64] {
        &self.y1
    }

    /// Evaluates the interpolant at `t`, clamped into the span.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        let n = self.dim;
        if t <= self.t0 {
            out.copy_from_slice(&self.y0);
            return;
        }
        if t >= self.t1 {
            out.copy_from_slice(&self.y1);
            return;
        }
        let idx = self.steps.partition_point(|s| s.t0 <= t).saturating_sub(1);
        let st = &self.steps[idx];
        let s = (t - st.t0) / st.h;
        let s1 = 1.0 - s;
        let c = |k: usize, i: usize| st.cont[k * n + i];
        for (i, o) in out.iter_mut().enumerate() {
            let conpar = c(4, i) + (c(5, i) + (c(6, i) + c(7, i) * s) * s1) * s;
            *o = c(0, i) + (c(1, i) + (c(2, i) + (c(3, i) + conpar * s1) * s) * s1) * s;
        }
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        out
    }
}

fn axpy_sum(y: &[f64], h: f64, terms: &[(f64, &[f64])], out: &mut [f64]) {
    for i in 0..y.len() {
        let mut acc = 0.0;
        for (a, k) in terms {
            acc += a * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

fn initial_step<F>(f: &F, t: f64, y: &[f64], f0: &[f64], t_end: f64, opts: &OdeOptions) -> Result<f64>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let h_max = opts.h_max.unwrap_or(t_end - t);
    let sk = |i: usize| opts.abs_tol + opts.rel_tol * y[i].abs();
    let dnf: f64 = (0..n).map(|i| (f0[i] / sk(i)).powi(2)).sum();
    let dny: f64 = (0..n).map(|i| (y[i] / sk(i)).powi(2)).sum();
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(h_max);
    let y1: Vec<f64> = (0..n).map(|i| y[i] + h * f0[i]).collect();
    let mut f1 = vec![0.0; n];
    f(t + h, &y1, &mut f1)?;
    let der2 = (0..n)
        .map(|i| ((f1[i] - f0[i]) / sk(i)).powi(2))
        .sum::<f64>()
        .sqrt()
        / h;
    let der12 = der2.abs().max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h.abs() * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(1.0 / 8.0)
    };
    Ok((100.0 * h).min(h1).min(h_max))
}

/// Integrates `y' = f(t, y)` from `t0` to `t1 > t0`.
pub fn integrate<F>(f: F, t0: f64, y0: &[f64], t1: f64, opts: &OdeOptions) -> Result<DenseSolution>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    if !(t1 > t0) {
        return Err(Error::Integration {
            t: t0,
            reason: format!("empty interval [{t0}, {t1}]"),
        });
    }
    let n = y0.len();
    let h_max = opts.h_max.unwrap_or(t1 - t0);
    let (safe, fac1, fac2): (f64, f64, f64) = (0.9, 0.333, 6.0);

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    f(t, &y, &mut k1)?;
    let mut evaluations = 1;
    let mut h = initial_step(&f, t, &y, &k1, t1, opts)?;
    evaluations += 1;

    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 16];
    let mut ys = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut k4_new = vec![0.0; n];
    let mut steps = Vec::new();
    let mut rejected = 0;
    let mut last_rejected = false;
    let mut count = 0;

    loop {
        if count >= opts.max_steps {
            return Err(Error::Integration {
                t,
                reason: "step limit exceeded".into(),
            });
        }
        count += 1;
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(Error::Integration {
                t,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }
        let last = t + 1.01 * h >= t1;
        if last {
            h = t1 - t;
        }

        // Stages 2..12; k[0] holds stage 1, k[i] stage i+1
        k[0].copy_from_slice(&k1);
        axpy_sum(&y, h, &[(A21, &k[0][..])], &mut ys);
        f(t + C2 * h, &ys, &mut k[1])?;
        axpy_sum(&y, h, &[(A31, &k[0][..]), (A32, &k[1][..])], &mut ys);
        f(t + C3 * h, &ys, &mut k[2])?;
        axpy_sum(&y, h, &[(A41, &k[0][..]), (A43, &k[2][..])], &mut ys);
        f(t + C4 * h, &ys, &mut k[3])?;
        axpy_sum(&y, h, &[(A51, &k[0][..]), (A53, &k[2][..]), (A54, &k[3][..])], &mut ys);
        f(t + C5 * h, &ys, &mut k[4])?;
        axpy_sum(&y, h, &[(A61, &k[0][..]), (A64, &k[3][..]), (A65, &k[4][..])], &mut ys);
        f(t + C6 * h, &ys, &mut k[5])?;
        axpy_sum(&y, h, &[(A71, &k[0][..]), (A74, &k[3][..]), (A75, &k[4][..]), (A76, &k[5][..])], &mut ys);
        f(t + C7 * h, &ys, &mut k[6])?;
        axpy_sum(
            &y,
            h,
            &[(A81, &k[0][..]), (A84, &k[3][..]), (A85, &k[4][..]), (A86, &k[5][..]), (A87, &k[6][..])],
            &mut ys,
        );
        f(t + C8 * h, &ys, &mut k[7])?;
        axpy_sum(
            &y,
            h,
            &[(A91, &k[0][..]), (A94, &k[3][..]), (A95, &k[4][..]), (A96, &k[5][..]), (A97, &k[6][..]), (A98, &k[7][..])],
            &mut ys,
        );
        f(t + C9 * h, &ys, &mut k[8])?;
        axpy_sum(
            &y,
            h,
            &[
                (A101, &k[0][..]), (A104, &k[3][..]), (A105, &k[4][..]), (A106, &k[5][..]),
                (A107, &k[6][..]), (A108, &k[7][..]), (A109, &k[8][..]),
            ],
            &mut ys,
        );
        f(t + C10 * h, &ys, &mut k[9])?;
        axpy_sum(
            &y,
            h,
            &[
                (A111, &k[0][..]), (A114, &k[3][..]), (A115, &k[4][..]), (A116, &k[5][..]), (A117, &k[6][..]),
                (A118, &k[7][..]), (A119, &k[8][..]), (A1110, &k[9][..]),
            ],
            &mut ys,
        );
        f(t + C11 * h, &ys, &mut k[10])?;
        axpy_sum(
            &y,
            h,
            &[
                (A121, &k[0][..]), (A124, &k[3][..]), (A125, &k[4][..]), (A126, &k[5][..]), (A127, &k[6][..]),
                (A128, &k[7][..]), (A129, &k[8][..]), (A1210, &k[9][..]), (A1211, &k[10][..]),
            ],
            &mut ys,
        );
        f(t + h, &ys, &mut k[11])?;
        evaluations += 11;

        // 8th-order solution and the two error estimates
        let mut err = 0.0;
        let mut err2 = 0.0;
        for i in 0..n {
            let inc = B1 * k[0][i] + B6 * k[5][i] + B7 * k[6][i] + B8 * k[7][i]
                + B9 * k[8][i] + B10 * k[9][i] + B11 * k[10][i] + B12 * k[11][i];
            y_new[i] = y[i] + h * inc;
            let sk = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            let e2 = inc - BHH1 * k[0][i] - BHH2 * k[8][i] - BHH3 * k[11][i];
            err2 += (e2 / sk).powi(2);
            let e1 = ER1 * k[0][i] + ER6 * k[5][i] + ER7 * k[6][i] + ER8 * k[7][i]
                + ER9 * k[8][i] + ER10 * k[9][i] + ER11 * k[10][i] + ER12 * k[11][i];
            err += (e1 / sk).powi(2);
        }
        let mut deno = err + 0.01 * err2;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = h.abs() * err * (1.0 / (deno * n as f64)).sqrt();

        let fac11 = err.powf(1.0 / 8.0);
        let fac = (1.0 / fac2).max((1.0 / fac1).min(fac11 / safe));
        let mut h_new = h / fac;

        if err <= 1.0 {
            f(t + h, &y_new, &mut k4_new)?;
            evaluations += 1;

            let cont = dense_coefficients(&f, t, h, &y, &y_new, &k4_new, &mut k, &mut ys)?;
            evaluations += 3;
            steps.push(DenseStep { t0: t, h, cont });

            k1.copy_from_slice(&k4_new);
            y.copy_from_slice(&y_new);
            t += h;
            if last {
                break;
            }
            if h_new.abs() > h_max {
                h_new = h_max;
            }
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
        } else {
            h_new = h / (1.0 / fac1).min(fac11 / safe);
            last_rejected = true;
            rejected += 1;
        }
        h = h_new;
    }

    Ok(DenseSolution {
        dim: n,
        t0,
        t1,
        steps,
        y0: y0.to_vec(),
        y1: y,
        rejected,
        evaluations,
    })
}

/// Builds the eight interpolation vectors of an accepted step. `k` holds
/// stages 1..12 on entry; three extra stages are evaluated.
#[allow(clippy::too_many_arguments)]
fn dense_coefficients<F>(
    f: &F,
    t: f64,
    h: f64,
    y: &[f64],
    y_new: &[f64],
    f_new: &[f64],
    k: &mut [Vec<f64>],
    ys: &mut [f64],
) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64], &mut [f64]) -> Result<()>,
{
    let n = y.len();
    let mut cont = vec![0.0; 8 * n];
    for i in 0..n {
        let ydiff = y_new[i] - y[i];
        let bspl = h * k[0][i] - ydiff;
        cont[i] = y[i];
        cont[n + i] = ydiff;
        cont[2 * n + i] = bspl;
        cont[3 * n + i] = ydiff - h * f_new[i] - bspl;
        let st = |d: &[f64; 8]| {
            d[0] * k[0][i] + d[1] * k[5][i] + d[2] * k[6][i] + d[3] * k[7][i]
                + d[4] * k[8][i] + d[5] * k[9][i] + d[6] * k[10][i] + d[7] * k[11][i]
        };
        cont[4 * n + i] = st(&D4A);
        cont[5 * n + i] = st(&D5A);
        cont[6 * n + i] = st(&D6A);
        cont[7 * n + i] = st(&D7A);
    }

    // stages 14, 15, 16 into slots 12, 13, 14; f_new is stage 13
    axpy_sum(
        y,
        h,
        &[
            (A141, &k[0][..]), (A147, &k[6][..]), (A148, &k[7][..]), (A149, &k[8][..]),
            (A1410, &k[9][..]), (A1411, &k[10][..]), (A1412, &k[11][..]), (A1413, f_new),
        ],
        ys,
    );
    f(t + C14 * h, ys, &mut k[12])?;
    axpy_sum(
        y,
        h,
        &[
            (A151, &k[0][..]), (A156, &k[5][..]), (A157, &k[6][..]), (A158, &k[7][..]),
            (A1511, &k[10][..]), (A1512, &k[11][..]), (A1513, f_new), (A1514, &k[12][..]),
        ],
        ys,
    );
    f(t + C15 * h, ys, &mut k[13])?;
    axpy_sum(
        y,
        h,
        &[
            (A161, &k[0][..]), (A166, &k[5][..]), (A167, &k[6][..]), (A168, &k[7][..]),
            (A169, &k[8][..]), (A1613, f_new), (A1614, &k[12][..]), (A1615, &k[13][..]),
        ],
        ys,
    );
    f(t + C16 * h, ys, &mut k[14])?;

    for i in 0..n {
        let tail = |d: &[f64; 4]| d[0] * f_new[i] + d[1] * k[12][i] + d[2] * k[13][i] + d[3] * k[14][i];
        cont[4 * n + i] = h * (cont[4 * n + i] + tail(&D4B));
        cont[5 * n + i] = h * (cont[5 * n + i] + tail(&D5B));
        cont[6 * n + i] = h * (cont[6 * n + i] + tail(&D6B));
        cont[7 * n + i] = h * (cont[7 * n + i] + tail(&D7B));
    }
    Ok(cont)
}

const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;
const A141: f64 = 5.61675022830479523392909219681E-2;
const A147: f64 = 2.53500210216624811088794765333E-1;
const A148: f64 = -2.46239037470802489917441475441E-1;
const A149: f64 = -1.24191423263816360469010140626E-1;
const A1410: f64 = 1.5329179827876569731206322685E-1;
const A1411: f64 = 8.20105229563468988491666602057E-3;
const A1412: f64 = 7.56789766054569976138603589584E-3;
const A1413: f64 = -8.298E-3;
const A151: f64 = 3.18346481635021405060768473261E-2;
const A156: f64 = 2.83009096723667755288322961402E-2;
const A157: f64 = 5.35419883074385676223797384372E-2;
const A158: f64 = -5.49237485713909884646569340306E-2;
const A1511: f64 = -1.08347328697249322858509316994E-4;
const A1512: f64 = 3.82571090835658412954920192323E-4;
const A1513: f64 = -3.40465008687404560802977114492E-4;
const A1514: f64 = 1.41312443674632500278074618366E-1;
const A161: f64 = -4.28896301583791923408573538692E-1;
const A166: f64 = -4.69762141536116384314449447206E0;
const A167: f64 = 7.68342119606259904184240953878E0;
const A168: f64 = 4.06898981839711007970213554331E0;
const A169: f64 = 3.56727187455281109270669543021E-1;
const A1613: f64 = -1.39902416515901462129418009734E-3;
const A1614: f64 = 2.9475147891527723389556272149E0;
const A1615: f64 = -9.15095847217987001081870187138E0;

const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;

const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;

const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;
const C14: f64 = 0.1E+00;
const C15: f64 = 0.2E+00;
const C16: f64 = 0.777777777777777777777777777778E+00;

const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;

// Dense output weights on stages (1, 6, 7, 8, 9, 10, 11, 12) and
// (13, 14, 15, 16).
const D4A: [f64; 8] = [
    -0.84289382761090128651353491142E+01, 0.56671495351937776962531783590E+00,
    -0.30689499459498916912797304727E+01, 0.23846676565120698287728149680E+01,
    0.21170345824450282767155149946E+01, -0.87139158377797299206789907490E+00,
    0.22404374302607882758541771650E+01, 0.63157877876946881815570249290E+00,
];
const D4B: [f64; 4] = [
    -0.88990336451333310820698117400E-01, 0.18148505520854727256656404962E+02,
    -0.91946323924783554000451984436E+01, -0.44360363875948939664310572000E+01,
];
const D5A: [f64; 8] = [
    0.10427508642579134603413151009E+02, 0.24228349177525818288430175319E+03,
    0.16520045171727028198505394887E+03, -0.37454675472269020279518312152E+03,
    -0.22113666853125306036270938578E+02, 0.77334326684722638389603898808E+01,
    -0.30674084731089398182061213626E+02, -0.93321305264302278729567221706E+01,
];
const D5B: [f64; 4] = [
    0.15697238121770843886131091075E+02, -0.31139403219565177677282850411E+02,
    -0.93529243588444783865713862664E+01, 0.35816841486394083752465898540E+02,
];
const D6A: [f64; 8] = [
    0.19985053242002433820987653617E+02, -0.38703730874935176555105901742E+03,
    -0.18917813819516756882830838328E+03, 0.52780815920542364900561016686E+03,
    -0.11573902539959630126141871134E+02, 0.68812326946963000169666922661E+01,
    -0.10006050966910838403183860980E+01, 0.77771377980534432092869265740E+00,
];
const D6B: [f64; 4] = [
    -0.27782057523535084065932004339E+01, -0.60196695231264120758267380846E+02,
    0.84320405506677161018159903784E+02, 0.11992291136182789328035130030E+02,
];
const D7A: [f64; 8] = [
    -0.25693933462703749003312586129E+02, -0.15418974869023643374053993627E+03,
    -0.23152937917604549567536039109E+03, 0.35763911791061412378285349910E+03,
    0.93405324183624310003907691704E+02, -0.37458323136451633156875139351E+02,
    0.10409964950896230045147246184E+03, 0.29840293426660503123344363579E+02,
];
const D7B: [f64; 4] = [
    -0.43533456590011143754432175058E+02, 0.96324553959188282948394950600E+02,
    -0.39177261675615439165231486172E+02, -0.14972683625798562581422125276E+03,
];

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(_t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        dy[0] = y[1];
        dy[1] = -y[0];
        Ok(())
    }

    #[test]
    fn harmonic_oscillator_endpoint_and_dense() {
        let opts = OdeOptions::default();
        let sol = integrate(harmonic, 0.0, &[1.0, 0.0], 10.0, &opts).unwrap();
        let end = sol.end();
        assert!((end[0] - 10f64.cos()).abs() < 1e-9);
        assert!((end[1] + 10f64.sin()).abs() < 1e-9);
        for i in 0..=200 {
            let t = 10.0 * i as f64 / 200.0;
            let y = sol.eval(t);
            assert!((y[0] - t.cos()).abs() < 1e-9, "t={t}");
            assert!((y[1] + t.sin()).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn dense_output_is_seventh_order_between_nodes() {
        // loose tolerance so steps are long and interpolation error is visible
        let opts = OdeOptions { rel_tol: 1e-6, abs_tol: 1e-8, ..Default::default() };
        let sol = integrate(harmonic, 0.0, &[1.0, 0.0], 6.0, &opts).unwrap();
        let worst = (0..600)
            .map(|i| {
                let t = 6.0 * (i as f64 + 0.5) / 600.0;
                (sol.eval(t)[0] - t.cos()).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-5, "{worst}");
    }

    #[test]
    fn tolerance_reduces_error() {
        let exact = (-3.0f64).exp();
        let err = |tol: f64| {
            let opts = OdeOptions { rel_tol: tol, abs_tol: tol * 0.1, ..Default::default() };
            let sol = integrate(
                |_t, y: &[f64], dy: &mut [f64]| {
                    dy[0] = -y[0];
                    Ok(())
                },
                0.0,
                &[1.0],
                3.0,
                &opts,
            )
            .unwrap();
            (sol.end()[0] - exact).abs()
        };
        assert!(err(1e-10) < err(1e-5));
    }

    #[test]
    fn propagates_rhs_errors() {
        let r = integrate(
            |t, _y: &[f64], _dy: &mut [f64]| {
                if t > 0.5 {
                    Err(Error::Singularity { t, denom: 0.0 })
                } else {
                    Ok(())
                }
            },
            0.0,
            &[1.0],
            1.0,
            &OdeOptions::default(),
        );
        assert!(r.is_err());
    }
}

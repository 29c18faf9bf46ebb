use super::ModelError;

/// Weights beyond the finite prefix.
#[derive(Clone, Debug, PartialEq)]
pub enum Tail {
    Constant(f64),
    Periodic(Vec<f64>),
    /// Alternating hi/lo blocks of lengths `L_i = round(initial_len · growthⁱ)`.
    /// The first weight of a hi block is `hi`, the first of a lo block is
    /// `lo`, every other weight is 1. With `hi·lo = 1` the partial products
    /// stay in `{1, hi}`.
    Blocks {
        hi: f64,
        lo: f64,
        growth: f64,
        initial_len: usize,
    },
}

/// Weight sequence `w_1, w_2, …` of a unilateral weighted shift.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightRule {
    prefix: Vec<f64>,
    tail: Tail,
}

// cap on block length so `growth^i` never leaves the usize range
const MAX_BLOCK: f64 = 1u64.wrapping_shl(52) as f64;

fn check_weight(v: f64, field: &str) -> Result<(), ModelError> {
    if !(v.is_finite() && v > 0.0) {
        return Err(ModelError::InvalidWeight { field: field.to_string(), value: v });
    }
    Ok(())
}

impl WeightRule {
    pub fn new(prefix: Vec<f64>, tail: Tail) -> Result<Self, ModelError> {
        for (i, &w) in prefix.iter().enumerate() {
            check_weight(w, &format!("weights.prefix[{i}]"))?;
        }
        match &tail {
            Tail::Constant(v) => check_weight(*v, "weights.tail.value")?,
            Tail::Periodic(vs) => {
                if vs.is_empty() {
                    return Err(ModelError::InvalidParameter {
                        field: "weights.tail.values".into(),
                        reason: "periodic tail needs at least one value".into(),
                    });
                }
                for (i, &w) in vs.iter().enumerate() {
                    check_weight(w, &format!("weights.tail.values[{i}]"))?;
                }
            }
            Tail::Blocks { hi, lo, growth, initial_len } => {
                check_weight(*hi, "weights.tail.hi")?;
                check_weight(*lo, "weights.tail.lo")?;
                if !(growth.is_finite() && *growth >= 1.0) {
                    return Err(ModelError::InvalidParameter {
                        field: "weights.tail.growth".into(),
                        reason: format!("growth factor must be >= 1, got {growth}"),
                    });
                }
                if *initial_len == 0 {
                    return Err(ModelError::InvalidParameter {
                        field: "weights.tail.initial_len".into(),
                        reason: "initial block length must be >= 1".into(),
                    });
                }
            }
        }
        Ok(WeightRule { prefix, tail })
    }

    pub fn constant(value: f64) -> Result<Self, ModelError> {
        Self::new(Vec::new(), Tail::Constant(value))
    }

    pub fn prefix(&self) -> &[f64] {
        &self.prefix
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    fn block_len(&self, cycle: usize) -> usize {
        match self.tail {
            Tail::Blocks { growth, initial_len, .. } => {
                if growth == 1.0 {
                    return initial_len;
                }
                let l = (initial_len as f64 * growth.powi(cycle.min(i32::MAX as usize) as i32)).round();
                l.clamp(1.0, MAX_BLOCK) as usize
            }
            _ => unreachable!("block_len on non-block tail"),
        }
    }

    /// Weight `w_k`, `k ≥ 1`.
    pub fn weight(&self, k: usize) -> f64 {
        assert!(k >= 1, "weights are indexed from 1");
        self.weights(k, 1)[0]
    }

    /// `w_start, …, w_{start+count-1}`.
    pub fn weights(&self, start: usize, count: usize) -> Vec<f64> {
        assert!(start >= 1, "weights are indexed from 1");
        let mut out = Vec::with_capacity(count);
        let mut k = start;
        while out.len() < count && k <= self.prefix.len() {
            out.push(self.prefix[k - 1]);
            k += 1;
        }
        if out.len() == count {
            return out;
        }
        let m0 = k - 1 - self.prefix.len();
        let rest = count - out.len();
        match &self.tail {
            Tail::Constant(v) => out.extend(std::iter::repeat(*v).take(rest)),
            Tail::Periodic(vs) => out.extend((0..rest).map(|i| vs[(m0 + i) % vs.len()])),
            Tail::Blocks { hi, lo, growth, initial_len } => {
                if *growth == 1.0 {
                    let l = *initial_len;
                    out.extend((0..rest).map(|i| {
                        let pos = (m0 + i) % (2 * l);
                        if pos == 0 {
                            *hi
                        } else if pos == l {
                            *lo
                        } else {
                            1.0
                        }
                    }));
                } else {
                    // walk to the cycle containing m0, then stream
                    let mut cycle = 0;
                    let mut cycle_start = 0usize;
                    loop {
                        let l = self.block_len(cycle);
                        if m0 < cycle_start + 2 * l {
                            break;
                        }
                        cycle_start += 2 * l;
                        cycle += 1;
                    }
                    let mut m = m0;
                    while out.len() < count {
                        let l = self.block_len(cycle);
                        let pos = m - cycle_start;
                        if pos >= 2 * l {
                            cycle_start += 2 * l;
                            cycle += 1;
                            continue;
                        }
                        out.push(if pos == 0 {
                            *hi
                        } else if pos == l {
                            *lo
                        } else {
                            1.0
                        });
                        m += 1;
                    }
                }
            }
        }
        out
    }

    /// Every distinct weight value that occurs in the sequence.
    pub fn distinct_values(&self) -> Vec<f64> {
        let mut vs: Vec<f64> = self.prefix.clone();
        match &self.tail {
            Tail::Constant(v) => vs.push(*v),
            Tail::Periodic(p) => vs.extend_from_slice(p),
            Tail::Blocks { hi, lo, growth, initial_len } => {
                vs.push(*hi);
                vs.push(*lo);
                if *initial_len > 1 || *growth > 1.0 {
                    vs.push(1.0);
                }
            }
        }
        vs.sort_by(f64::total_cmp);
        vs.dedup();
        vs
    }

    /// Products are kept in log space once a weight leaves `[1/2, 2]`.
    pub fn needs_log_space(&self) -> bool {
        self.distinct_values().iter().any(|&w| !(0.5..=2.0).contains(&w))
    }

    /// Last window start that has to be scanned to see every distinct
    /// product of `n` consecutive weights. Windows starting later repeat an
    /// earlier one (periodic tails) or contain at most one block marker.
    pub(crate) fn scan_horizon(&self, n: usize) -> usize {
        let p = self.prefix.len();
        match &self.tail {
            Tail::Constant(_) => p + 1,
            Tail::Periodic(vs) => p + vs.len(),
            Tail::Blocks { growth, initial_len, .. } => {
                if *growth == 1.0 {
                    return p + 2 * initial_len;
                }
                let mut cycle = 0;
                let mut start = 0usize;
                loop {
                    let l = self.block_len(cycle);
                    start += 2 * l;
                    if l > n {
                        return p + start;
                    }
                    cycle += 1;
                }
            }
        }
    }

    /// `(sup, inf)` over `k ≥ 1` of `w_k ⋯ w_{k+n-1}`, i.e. `‖Tⁿ‖` and the
    /// lower bound `inf ‖Tⁿx‖/‖x‖`.
    pub fn window_extremes(&self, n: usize) -> (f64, f64) {
        if n == 0 {
            return (1.0, 1.0);
        }
        let horizon = self.scan_horizon(n);
        let w = self.weights(1, horizon + n - 1);
        let logs: Vec<f64> = w.iter().map(|v| v.ln()).collect();
        let mut window: f64 = logs[..n].iter().sum();
        let (mut best, mut worst) = ((window, 0usize), (window, 0usize));
        for k in 1..horizon {
            // recompute periodically so the running sum does not drift
            window = if k % 4096 == 0 { logs[k..k + n].iter().sum() } else { window + logs[k + n - 1] - logs[k - 1] };
            if window > best.0 {
                best = (window, k);
            }
            if window < worst.0 {
                worst = (window, k);
            }
        }
        let product = |k: usize, log: f64| {
            let direct: f64 = w[k..k + n].iter().product();
            if direct.is_finite() && direct > 0.0 {
                direct
            } else {
                log.exp()
            }
        };
        (product(best.1, best.0), product(worst.1, worst.0))
    }
}

use std::io::{Read, Write};

use super::{ChainConfig, SamplerError, SamplerWarning};

/// Post-warmup draws laid out as `[chain][draw][parameter]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSamples {
    param_names: Vec<String>,
    n_chains: usize,
    n_draws: usize,
    draws: Vec<f64>,
    /// Fraction of accepted proposals per chain, post-warmup.
    pub acceptance: Vec<f64>,
    pub warnings: Vec<SamplerWarning>,
    /// Settings that produced the draws; absent when loaded from a file.
    pub config: Option<ChainConfig>,
}

impl PosteriorSamples {
    /// Builds samples from a flat `[chain][draw][parameter]` buffer.
    pub fn new(
        param_names: Vec<String>,
        n_chains: usize,
        n_draws: usize,
        draws: Vec<f64>,
    ) -> Result<Self, SamplerError> {
        let dim = param_names.len();
        if dim == 0 || n_chains == 0 || n_draws == 0 {
            return Err(SamplerError::Samples(
                "need at least one parameter, chain and draw".into(),
            ));
        }
        if draws.len() != n_chains * n_draws * dim {
            return Err(SamplerError::Samples(format!(
                "expected {} values for {n_chains} chains x {n_draws} draws x {dim} parameters, got {}",
                n_chains * n_draws * dim,
                draws.len()
            )));
        }
        if let Some(pos) = draws.iter().position(|v| !v.is_finite()) {
            let per_chain = n_draws * dim;
            return Err(SamplerError::Samples(format!(
                "non-finite value at chain {}, draw {}, parameter '{}'",
                pos / per_chain,
                (pos % per_chain) / dim,
                param_names[pos % dim]
            )));
        }
        Ok(Self {
            param_names,
            n_chains,
            n_draws,
            draws,
            acceptance: Vec::new(),
            warnings: Vec::new(),
            config: None,
        })
    }

    /// Builds samples from per-chain, per-parameter series:
    /// `chains[c][p][d]`.
    pub fn from_chains(param_names: Vec<String>, chains: &[Vec<Vec<f64>>]) -> Result<Self, SamplerError> {
        let dim = param_names.len();
        let n_draws = chains.first().and_then(|c| c.first()).map_or(0, Vec::len);
        let mut draws = Vec::with_capacity(chains.len() * n_draws * dim);
        for (c, chain) in chains.iter().enumerate() {
            if chain.len() != dim || chain.iter().any(|s| s.len() != n_draws) {
                return Err(SamplerError::Samples(format!("chain {c} has a ragged shape")));
            }
            for d in 0..n_draws {
                draws.extend(chain.iter().map(|series| series[d]));
            }
        }
        Self::new(param_names, chains.len(), n_draws, draws)
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }

    pub fn n_chains(&self) -> usize {
        self.n_chains
    }

    pub fn n_draws(&self) -> usize {
        self.n_draws
    }

    pub fn dim(&self) -> usize {
        self.param_names.len()
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.param_names.iter().position(|n| n == name)
    }

    /// One draw (all parameters).
    pub fn draw(&self, chain: usize, draw: usize) -> &[f64] {
        let dim = self.dim();
        let start = (chain * self.n_draws + draw) * dim;
        &self.draws[start..start + dim]
    }

    /// Trace of one parameter within one chain.
    pub fn chain_trace(&self, chain: usize, param: usize) -> Vec<f64> {
        (0..self.n_draws).map(|d| self.draw(chain, d)[param]).collect()
    }

    /// All chains for one parameter, `[chain][draw]`.
    pub fn traces(&self, param: usize) -> Vec<Vec<f64>> {
        (0..self.n_chains).map(|c| self.chain_trace(c, param)).collect()
    }

    /// Draws of one parameter pooled across chains, chain-major.
    pub fn pooled(&self, param: usize) -> Vec<f64> {
        self.draws.iter().skip(param).step_by(self.dim()).copied().collect()
    }

    pub fn pooled_by_name(&self, name: &str) -> Option<Vec<f64>> {
        self.param_index(name).map(|p| self.pooled(p))
    }

    /// Maps every draw through `f`, producing samples over `names`.
    /// Acceptance, warnings and config carry over.
    pub fn map_draws(
        &self,
        names: Vec<String>,
        f: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Self, SamplerError> {
        let mut out = Vec::with_capacity(self.n_chains * self.n_draws * names.len());
        for chunk in self.draws.chunks(self.dim()) {
            let mapped = f(chunk);
            if mapped.len() != names.len() {
                return Err(SamplerError::Samples(format!(
                    "mapping produced {} values for {} names",
                    mapped.len(),
                    names.len()
                )));
            }
            out.extend(mapped);
        }
        let mut s = Self::new(names, self.n_chains, self.n_draws, out)?;
        s.acceptance = self.acceptance.clone();
        s.warnings = self.warnings.clone();
        s.config = self.config.clone();
        Ok(s)
    }

    /// Writes the draw CSV: header `chain,draw,<param...>`, one row per
    /// (chain, draw), chain-major. Values use Rust's shortest round-trip
    /// formatting, so reading the file back reproduces every draw exactly.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["chain".to_string(), "draw".to_string()];
        header.extend(self.param_names.iter().cloned());
        w.write_record(&header)?;
        let mut row = Vec::with_capacity(header.len());
        for c in 0..self.n_chains {
            for d in 0..self.n_draws {
                row.clear();
                row.push(c.to_string());
                row.push(d.to_string());
                row.extend(self.draw(c, d).iter().map(|v| v.to_string()));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a draw CSV written by [`PosteriorSamples::write_csv`].
    ///
    /// Chains must be numbered `0..n` and each must hold the draws
    /// `0..n_draws` in order; a chain with fewer rows than the others is
    /// reported as truncated.
    pub fn read_csv<R: Read>(input: R) -> Result<Self, SamplerError> {
        let bad = |m: String| SamplerError::Samples(m);
        let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(input);
        let header = r.headers().map_err(|e| bad(format!("unreadable header: {e}")))?.clone();
        if header.len() < 3 || &header[0] != "chain" || &header[1] != "draw" {
            return Err(bad("header must start with 'chain,draw' followed by parameter names".into()));
        }
        let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
        let dim = names.len();

        let mut rows_per_chain: Vec<usize> = Vec::new();
        let mut values: Vec<Vec<f64>> = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| bad(format!("line {line}: {e}")))?;
            if rec.len() != dim + 2 {
                return Err(bad(format!(
                    "draw file truncated or malformed at line {line}: expected {} fields, found {}",
                    dim + 2,
                    rec.len()
                )));
            }
            let chain: usize = rec[0]
                .parse()
                .map_err(|_| bad(format!("line {line}: invalid chain index '{}'", &rec[0])))?;
            let draw: usize = rec[1]
                .parse()
                .map_err(|_| bad(format!("line {line}: invalid draw index '{}'", &rec[1])))?;
            if chain > rows_per_chain.len() {
                return Err(bad(format!("line {line}: chain {chain} appears before chain {}", rows_per_chain.len())));
            }
            if chain == rows_per_chain.len() {
                rows_per_chain.push(0);
                values.push(Vec::new());
            }
            if chain + 1 != rows_per_chain.len() {
                return Err(bad(format!("line {line}: rows of chain {chain} are not contiguous")));
            }
            if draw != rows_per_chain[chain] {
                return Err(bad(format!(
                    "line {line}: chain {chain} expected draw {}, found {draw}",
                    rows_per_chain[chain]
                )));
            }
            for field in rec.iter().skip(2) {
                let v: f64 = field
                    .parse()
                    .map_err(|_| bad(format!("line {line}: invalid number '{field}'")))?;
                values[chain].push(v);
            }
            rows_per_chain[chain] += 1;
        }
        let n_draws = rows_per_chain.iter().copied().max().unwrap_or(0);
        if n_draws == 0 {
            return Err(bad("draw file contains no rows".into()));
        }
        if let Some((c, &n)) = rows_per_chain.iter().enumerate().find(|(_, &n)| n != n_draws) {
            return Err(bad(format!(
                "draw file truncated: chain {c} has {n} rows, expected {n_draws}"
            )));
        }
        let n_chains = rows_per_chain.len();
        Self::new(names, n_chains, n_draws, values.concat())
    }
}

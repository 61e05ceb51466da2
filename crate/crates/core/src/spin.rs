//! Spin-1/2 chain Hamiltonians on `L` sites.
//!
//! Basis convention: site `i` is bit `L - 1 - i` of the basis-state index, and
//! bit value 0 is the `sigma^z = +1` state. Site 0 is therefore the most
//! significant qubit, which matches `kron(op_0, kron(op_1, ...))`.
//!
//! The transverse-field Ising chain is
//! `H = -J sum_i [x_i x_{i+1} + h z_i]` and the XXZ chain is
//! `H = J sum_i [x_i x_{i+1} + y_i y_{i+1} + delta z_i z_{i+1}]`, with
//! `i + 1` taken modulo `L` for periodic chains.

use std::fmt;

use faer::c64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, re, HermitianOperator, SpectralBlock, SpectralDecomposition};

pub const MIN_SITES: usize = 2;
pub const MAX_SITES: usize = 13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    /// Image of the single-qubit state `bit` as `(flipped?, amplitude)`.
    fn act(self, bit: usize) -> (bool, c64) {
        match (self, bit) {
            (Pauli::X, _) => (true, re(1.0)),
            (Pauli::Y, 0) => (true, c64::new(0.0, 1.0)),
            (Pauli::Y, _) => (true, c64::new(0.0, -1.0)),
            (Pauli::Z, 0) => (false, re(1.0)),
            (Pauli::Z, _) => (false, re(-1.0)),
        }
    }
}

/// A real multiple of a Pauli string.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub ops: Vec<(usize, Pauli)>,
}

impl PauliTerm {
    pub fn new(coeff: f64, ops: Vec<(usize, Pauli)>) -> Self {
        Self { coeff, ops }
    }

    pub fn sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.ops.iter().map(|&(s, _)| s)
    }

    /// `term |state> = amplitude |image>` for a chain of `sites` qubits.
    pub fn apply(&self, sites: usize, state: usize) -> (usize, c64) {
        let mut out = state;
        let mut amp = re(self.coeff);
        for &(site, p) in &self.ops {
            let shift = sites - 1 - site;
            let bit = (state >> shift) & 1;
            let (flip, a) = p.act(bit);
            if flip {
                out ^= 1 << shift;
            }
            amp *= a;
        }
        (out, amp)
    }
}

/// Dense matrix of a sum of Pauli terms on `sites` qubits.
pub fn terms_to_operator(sites: usize, terms: &[PauliTerm]) -> Result<HermitianOperator> {
    let dim = checked_dim(sites)?;
    let mut mat = faer::Mat::<c64>::zeros(dim, dim);
    for state in 0..dim {
        for term in terms {
            let (image, amp) = term.apply(sites, state);
            mat[(image, state)] += amp;
        }
    }
    HermitianOperator::new(mat)
}

fn checked_dim(sites: usize) -> Result<usize> {
    if sites == 0 || sites > MAX_SITES {
        return Err(Error::InvalidModel(format!(
            "{sites} sites is outside the supported range 1..={MAX_SITES}"
        )));
    }
    Ok(1 << sites)
}

/// Tensor product of single-site Paulis with identities elsewhere.
pub fn pauli_string(sites: usize, ops: &[(usize, Pauli)]) -> Result<HermitianOperator> {
    checked_dim(sites)?;
    let mut seen = vec![false; sites];
    for &(s, _) in ops {
        if s >= sites {
            return Err(Error::InvalidArgument(format!(
                "site {s} out of range for {sites} sites"
            )));
        }
        if seen[s] {
            return Err(Error::InvalidArgument(format!("site {s} appears twice")));
        }
        seen[s] = true;
    }
    terms_to_operator(sites, &[PauliTerm::new(1.0, ops.to_vec())])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ModelFamily {
    Ising { h: f64 },
    Xxz { delta: f64 },
}

impl ModelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::Ising { .. } => "ising",
            ModelFamily::Xxz { .. } => "xxz",
        }
    }

    /// Name and value of the family's own parameter.
    pub fn parameter(&self) -> (&'static str, f64) {
        match *self {
            ModelFamily::Ising { h } => ("h", h),
            ModelFamily::Xxz { delta } => ("delta", delta),
        }
    }

    pub fn with_parameter(&self, value: f64) -> Self {
        match self {
            ModelFamily::Ising { .. } => ModelFamily::Ising { h: value },
            ModelFamily::Xxz { .. } => ModelFamily::Xxz { delta: value },
        }
    }
}

/// Ising or XXZ chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelDocument", into = "ModelDocument")]
pub struct SpinChainModel {
    family: ModelFamily,
    sites: usize,
    coupling: f64,
    periodic: bool,
}

impl SpinChainModel {
    pub fn new(family: ModelFamily, sites: usize) -> Result<Self> {
        Self::with_options(family, sites, 1.0, true)
    }

    pub fn ising(sites: usize, h: f64) -> Result<Self> {
        Self::new(ModelFamily::Ising { h }, sites)
    }

    pub fn xxz(sites: usize, delta: f64) -> Result<Self> {
        Self::new(ModelFamily::Xxz { delta }, sites)
    }

    pub fn with_options(
        family: ModelFamily,
        sites: usize,
        coupling: f64,
        periodic: bool,
    ) -> Result<Self> {
        if !(MIN_SITES..=MAX_SITES).contains(&sites) {
            return Err(Error::InvalidModel(format!(
                "L = {sites} outside {MIN_SITES}..={MAX_SITES}"
            )));
        }
        if !coupling.is_finite() || coupling == 0.0 {
            return Err(Error::InvalidModel(format!(
                "coupling must be finite and nonzero, got {coupling}"
            )));
        }
        let (name, p) = family.parameter();
        if !p.is_finite() {
            return Err(Error::InvalidModel(format!(
                "{name} must be finite, got {p}"
            )));
        }
        Ok(Self {
            family,
            sites,
            coupling,
            periodic,
        })
    }

    pub fn family(&self) -> ModelFamily {
        self.family
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        1 << self.sites
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn periodic(&self) -> bool {
        self.periodic
    }

    pub fn with_family(&self, family: ModelFamily) -> Result<Self> {
        Self::with_options(family, self.sites, self.coupling, self.periodic)
    }

    pub fn with_sites(&self, sites: usize) -> Result<Self> {
        Self::with_options(self.family, sites, self.coupling, self.periodic)
    }

    fn bonds(&self) -> Vec<(usize, usize)> {
        let l = self.sites;
        let last = if self.periodic { l } else { l - 1 };
        (0..last).map(|i| (i, (i + 1) % l)).collect()
    }

    /// The Hamiltonian as a list of Pauli terms.
    pub fn terms(&self) -> Vec<PauliTerm> {
        let j = self.coupling;
        let mut terms = Vec::new();
        match self.family {
            ModelFamily::Ising { h } => {
                for (a, b) in self.bonds() {
                    terms.push(PauliTerm::new(-j, vec![(a, Pauli::X), (b, Pauli::X)]));
                }
                if h != 0.0 {
                    for i in 0..self.sites {
                        terms.push(PauliTerm::new(-j * h, vec![(i, Pauli::Z)]));
                    }
                }
            }
            ModelFamily::Xxz { delta } => {
                for (a, b) in self.bonds() {
                    terms.push(PauliTerm::new(j, vec![(a, Pauli::X), (b, Pauli::X)]));
                    terms.push(PauliTerm::new(j, vec![(a, Pauli::Y), (b, Pauli::Y)]));
                    if delta != 0.0 {
                        terms.push(PauliTerm::new(
                            j * delta,
                            vec![(a, Pauli::Z), (b, Pauli::Z)],
                        ));
                    }
                }
            }
        }
        terms
    }

    pub fn hamiltonian(&self) -> Result<HermitianOperator> {
        terms_to_operator(self.sites, &self.terms())
    }

    /// Basis states grouped by a conserved quantity: `prod_i z_i` parity for
    /// Ising, total magnetization for XXZ. The Hamiltonian has no matrix
    /// elements between different groups.
    pub fn symmetry_sectors(&self) -> Vec<Vec<usize>> {
        let dim = self.dim();
        match self.family {
            ModelFamily::Ising { .. } => {
                let mut sectors = vec![Vec::new(), Vec::new()];
                for s in 0..dim {
                    sectors[(s.count_ones() % 2) as usize].push(s);
                }
                sectors
            }
            ModelFamily::Xxz { .. } => {
                let mut sectors = vec![Vec::new(); self.sites + 1];
                for s in 0..dim {
                    sectors[s.count_ones() as usize].push(s);
                }
                sectors
            }
        }
    }

    /// Spectral decomposition computed sector by sector.
    pub fn diagonalize(&self) -> Result<SpectralDecomposition> {
        let terms = self.terms();
        let dim = self.dim();
        let mut position = vec![0usize; dim];
        let mut sector_of = vec![0usize; dim];
        let sectors: Vec<Vec<usize>> = self
            .symmetry_sectors()
            .into_iter()
            .filter(|s| !s.is_empty())
            .collect();
        for (id, sector) in sectors.iter().enumerate() {
            for (r, &s) in sector.iter().enumerate() {
                position[s] = r;
                sector_of[s] = id;
            }
        }
        let mut blocks = Vec::new();
        for (id, sector) in sectors.into_iter().enumerate() {
            let m = sector.len();
            let mut mat = faer::Mat::<c64>::zeros(m, m);
            // single Pauli strings may leave the sector; their sum may not
            let mut leak: Vec<(usize, c64)> = Vec::new();
            for (col, &s) in sector.iter().enumerate() {
                leak.clear();
                for term in &terms {
                    let (image, amp) = term.apply(self.sites, s);
                    if sector_of[image] == id {
                        mat[(position[image], col)] += amp;
                    } else {
                        match leak.iter_mut().find(|(i, _)| *i == image) {
                            Some((_, a)) => *a += amp,
                            None => leak.push((image, amp)),
                        }
                    }
                }
                if let Some((image, amp)) = leak.iter().find(|(_, a)| a.norm() > 1e-12) {
                    return Err(Error::InvalidModel(format!(
                        "sector {id} couples state {s} to state {image} with amplitude {amp}"
                    )));
                }
            }
            let block = HermitianOperator::new(mat)?;
            blocks.push(SpectralBlock::diagonalize(&block, sector)?);
        }
        SpectralDecomposition::from_blocks(dim, blocks)
    }

    /// Terms supported entirely on the window of `sub`, in window-local site
    /// numbering.
    pub fn local_terms(&self, sub: &SubsystemSpec) -> Result<Vec<PauliTerm>> {
        self.check_subsystem(sub)?;
        let local = sub.window_sites();
        Ok(restrict_terms(&self.terms(), &local))
    }

    /// `H_A` on the `d_A`-dimensional window space.
    pub fn local_hamiltonian(&self, sub: &SubsystemSpec) -> Result<HermitianOperator> {
        let terms = self.local_terms(sub)?;
        terms_to_operator(sub.len(), &terms)
    }

    /// `H_B` on the complement of the window, in complement-local numbering.
    /// Returns `None` when the window is the whole chain.
    pub fn complement_hamiltonian(&self, sub: &SubsystemSpec) -> Result<Option<HermitianOperator>> {
        self.check_subsystem(sub)?;
        let comp = sub.complement_sites();
        if comp.is_empty() {
            return Ok(None);
        }
        let terms = restrict_terms(&self.terms(), &comp);
        terms_to_operator(comp.len(), &terms).map(Some)
    }

    /// Terms straddling the cut, as an operator in the `(a, b)` ordering of
    /// [`SubsystemSpec::bipartition_index`].
    pub fn interaction_hamiltonian(&self, sub: &SubsystemSpec) -> Result<HermitianOperator> {
        self.check_subsystem(sub)?;
        let window = sub.window_sites();
        let straddling: Vec<PauliTerm> = self
            .terms()
            .into_iter()
            .filter(|t| {
                let inside = t.sites().filter(|s| window.contains(s)).count();
                inside != 0 && inside != t.ops.len()
            })
            .collect();
        let full = terms_to_operator(self.sites, &straddling)?;
        Ok(sub.reorder(&full))
    }

    pub fn check_subsystem(&self, sub: &SubsystemSpec) -> Result<()> {
        if sub.chain_len() != self.sites {
            return Err(Error::InvalidSubsystem(format!(
                "subsystem defined for L = {}, model has L = {}",
                sub.chain_len(),
                self.sites
            )));
        }
        Ok(())
    }
}

fn restrict_terms(terms: &[PauliTerm], sites: &[usize]) -> Vec<PauliTerm> {
    terms
        .iter()
        .filter(|t| t.sites().all(|s| sites.contains(&s)))
        .map(|t| {
            let ops = t
                .ops
                .iter()
                .map(|&(s, p)| (sites.iter().position(|&x| x == s).unwrap(), p))
                .collect();
            PauliTerm::new(t.coeff, ops)
        })
        .collect()
}

impl fmt::Display for SpinChainModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (name, value) = self.family.parameter();
        write!(
            f,
            "{}(L={}, J={}, {}={}{})",
            self.family.name(),
            self.sites,
            self.coupling,
            name,
            value,
            if self.periodic { "" } else { ", open" }
        )
    }
}

/// JSON form of a model:
/// `{"family": "ising"|"xxz", "L": int, "J": real, "h"|"delta": real, "periodic": bool}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub family: String,
    #[serde(rename = "L")]
    pub sites: usize,
    #[serde(rename = "J", default = "one")]
    pub coupling: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "yes")]
    pub periodic: bool,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

impl TryFrom<ModelDocument> for SpinChainModel {
    type Error = Error;

    fn try_from(doc: ModelDocument) -> Result<Self> {
        let family = match (doc.family.to_ascii_lowercase().as_str(), doc.h, doc.delta) {
            ("ising", h, None) => ModelFamily::Ising {
                h: h.unwrap_or(0.0),
            },
            ("xxz", None, d) => ModelFamily::Xxz {
                delta: d.unwrap_or(0.0),
            },
            ("ising", _, Some(_)) => {
                return Err(Error::InvalidModel(
                    "ising models take `h`, not `delta`".into(),
                ))
            }
            ("xxz", Some(_), _) => {
                return Err(Error::InvalidModel(
                    "xxz models take `delta`, not `h`".into(),
                ))
            }
            (other, _, _) => return Err(Error::InvalidModel(format!("unknown family `{other}`"))),
        };
        SpinChainModel::with_options(family, doc.sites, doc.coupling, doc.periodic)
    }
}

impl From<SpinChainModel> for ModelDocument {
    fn from(m: SpinChainModel) -> Self {
        let (h, delta) = match m.family {
            ModelFamily::Ising { h } => (Some(h), None),
            ModelFamily::Xxz { delta } => (None, Some(delta)),
        };
        ModelDocument {
            family: m.family.name().to_string(),
            sites: m.sites,
            coupling: m.coupling,
            h,
            delta,
            periodic: m.periodic,
        }
    }
}

/// A contiguous window of `len` sites starting at `start`, wrapping around the
/// end of the chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsystemSpec {
    chain_len: usize,
    start: usize,
    len: usize,
}

impl SubsystemSpec {
    pub fn new(chain_len: usize, start: usize, len: usize) -> Result<Self> {
        if !(1..=MAX_SITES).contains(&chain_len) {
            return Err(Error::InvalidSubsystem(format!("chain length {chain_len}")));
        }
        if start >= chain_len {
            return Err(Error::InvalidSubsystem(format!(
                "start site {start} outside a chain of {chain_len}"
            )));
        }
        if len == 0 || len > chain_len {
            return Err(Error::InvalidSubsystem(format!(
                "window of {len} sites in a chain of {chain_len}"
            )));
        }
        Ok(Self {
            chain_len,
            start,
            len,
        })
    }

    /// Window `[0, len)`.
    pub fn leading(chain_len: usize, len: usize) -> Result<Self> {
        Self::new(chain_len, 0, len)
    }

    pub fn whole(chain_len: usize) -> Result<Self> {
        Self::new(chain_len, 0, chain_len)
    }

    pub fn chain_len(&self) -> usize {
        self.chain_len
    }

    pub fn start(&self) -> usize {
        self.start
    }

    /// Number of sites in the window.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_whole(&self) -> bool {
        self.len == self.chain_len
    }

    pub fn d_a(&self) -> usize {
        1 << self.len
    }

    pub fn d_b(&self) -> usize {
        1 << (self.chain_len - self.len)
    }

    /// Window sites in window order.
    pub fn window_sites(&self) -> Vec<usize> {
        (0..self.len)
            .map(|k| (self.start + k) % self.chain_len)
            .collect()
    }

    /// Complement sites, continuing after the window.
    pub fn complement_sites(&self) -> Vec<usize> {
        (self.len..self.chain_len)
            .map(|k| (self.start + k) % self.chain_len)
            .collect()
    }

    /// Splits a global basis index into window and complement indices.
    pub fn split(&self, state: usize) -> (usize, usize) {
        let l = self.chain_len;
        let bit = |site: usize| (state >> (l - 1 - site)) & 1;
        let mut a = 0;
        for s in self.window_sites() {
            a = (a << 1) | bit(s);
        }
        let mut b = 0;
        for s in self.complement_sites() {
            b = (b << 1) | bit(s);
        }
        (a, b)
    }

    /// For every global basis index, its position `a * d_B + b` in the
    /// window-major ordering.
    pub fn bipartition_index(&self) -> Vec<usize> {
        let db = self.d_b();
        (0..1usize << self.chain_len)
            .map(|s| {
                let (a, b) = self.split(s);
                a * db + b
            })
            .collect()
    }

    /// Permutes an operator on the chain into window-major ordering, ready for
    /// [`linalg::partial_trace`] with dims `(d_A, d_B)`.
    pub fn reorder(&self, op: &HermitianOperator) -> HermitianOperator {
        let perm = self.bipartition_index();
        let n = perm.len();
        assert_eq!(op.dim(), n, "operator does not act on the whole chain");
        let mut inv = vec![0; n];
        for (s, &p) in perm.iter().enumerate() {
            inv[p] = s;
        }
        HermitianOperator::new(faer::Mat::from_fn(n, n, |i, j| op.get(inv[i], inv[j])))
            .expect("permutation preserves Hermiticity")
    }

    /// Reduced operator on the window.
    pub fn trace_out_complement(&self, op: &HermitianOperator) -> Result<HermitianOperator> {
        linalg::partial_trace(&self.reorder(op), (self.d_a(), self.d_b()), linalg::Keep::A)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigvalsh, kron, HermitianOperator};

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    // Hand-built 4x4 matrices, independent of the Pauli-term machinery.
    fn xx_4x4() -> HermitianOperator {
        HermitianOperator::from_real_fn(4, |i, j| if i + j == 3 { 1.0 } else { 0.0 }).unwrap()
    }

    #[test]
    fn ising_two_sites_periodic_doubles_the_bond() {
        let h = SpinChainModel::ising(2, 0.0)
            .unwrap()
            .hamiltonian()
            .unwrap();
        // -J (x0 x1 + x1 x0) = -2 x0 x1
        assert!(h.max_abs_diff(&xx_4x4().scale(-2.0)) < 1e-15);
        let ev = eigvalsh(&h).unwrap();
        for (a, b) in ev.iter().zip([-2.0, -2.0, 2.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn xxz_two_sites_matches_hand_matrix() {
        // 2J (xx + yy + zz): zz = diag(1,-1,-1,1), xx+yy swaps |01> and |10> with weight 2
        let oracle = HermitianOperator::from_real_fn(4, |i, j| {
            let zz = [1.0, -1.0, -1.0, 1.0];
            let mut v = if i == j { zz[i] } else { 0.0 };
            if (i, j) == (1, 2) || (i, j) == (2, 1) {
                v += 2.0;
            }
            2.0 * v
        })
        .unwrap();
        let h = SpinChainModel::xxz(2, 1.0).unwrap().hamiltonian().unwrap();
        assert!(h.max_abs_diff(&oracle) < 1e-15);
        let ev = eigvalsh(&h).unwrap();
        for (a, b) in ev.iter().zip([-6.0, 2.0, 2.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn open_two_site_chain_counts_bond_once() {
        let m = SpinChainModel::with_options(ModelFamily::Ising { h: 0.0 }, 2, 1.0, false).unwrap();
        assert!(m.hamiltonian().unwrap().max_abs_diff(&xx_4x4().scale(-1.0)) < 1e-15);
    }

    #[test]
    fn model_bounds() {
        assert!(SpinChainModel::ising(1, 0.0).is_err());
        assert!(SpinChainModel::ising(14, 0.0).is_err());
        assert!(SpinChainModel::with_options(ModelFamily::Ising { h: 1.0 }, 4, 0.0, true).is_err());
        assert!(SpinChainModel::ising(4, f64::NAN).is_err());
    }

    #[test]
    fn pauli_string_examples() {
        let z0 = pauli_string(2, &[(0, Pauli::Z)]).unwrap();
        assert!(z0.max_abs_diff(&HermitianOperator::diagonal(&[1.0, 1.0, -1.0, -1.0])) < 1e-15);
        let xx = pauli_string(2, &[(0, Pauli::X), (1, Pauli::X)]).unwrap();
        assert!(xx.max_abs_diff(&xx_4x4()) < 1e-15);
        assert!(pauli_string(2, &[(0, Pauli::X), (0, Pauli::Z)]).is_err());
        assert!(pauli_string(2, &[(2, Pauli::X)]).is_err());
    }

    #[test]
    fn pauli_strings_are_involutions() {
        let ops = [
            vec![(0, Pauli::Y)],
            vec![(0, Pauli::X), (2, Pauli::Y)],
            vec![(1, Pauli::Y), (2, Pauli::Z), (0, Pauli::Y)],
        ];
        for o in ops {
            let p = pauli_string(3, &o).unwrap();
            assert!(p.square().max_abs_diff(&HermitianOperator::identity(8)) < 1e-14);
        }
    }

    #[test]
    fn pauli_string_matches_kron() {
        let y = HermitianOperator::from_fn(2, |i, j| match (i, j) {
            (0, 1) => c64::new(0.0, -1.0),
            (1, 0) => c64::new(0.0, 1.0),
            _ => re(0.0),
        })
        .unwrap();
        let z = HermitianOperator::diagonal(&[1.0, -1.0]);
        let id = HermitianOperator::identity(2);
        let oracle = kron(&y, &kron(&id, &z).unwrap()).unwrap();
        let p = pauli_string(3, &[(0, Pauli::Y), (2, Pauli::Z)]).unwrap();
        assert!(p.max_abs_diff(&oracle) < 1e-15);
    }

    #[test]
    fn xxz_conserves_magnetization_and_spin_flip() {
        for delta in [-1.3, 0.0, 0.7] {
            let m = SpinChainModel::xxz(5, delta).unwrap();
            let h = m.hamiltonian().unwrap();
            let terms: Vec<PauliTerm> = (0..5)
                .map(|i| PauliTerm::new(1.0, vec![(i, Pauli::Z)]))
                .collect();
            let mz = terms_to_operator(5, &terms).unwrap();
            assert!(h.commutator_norm(&mz) < 1e-11);
            let flip = pauli_string(5, &(0..5).map(|i| (i, Pauli::X)).collect::<Vec<_>>()).unwrap();
            assert!(h.commutator_norm(&flip) < 1e-11);
        }
    }

    #[test]
    fn periodic_chains_are_translation_invariant() {
        let sites = 5;
        let dim = 1 << sites;
        let image = |s: usize| (s >> 1) | ((s & 1) << (sites - 1));
        for model in [
            SpinChainModel::ising(sites, 0.8).unwrap(),
            SpinChainModel::xxz(sites, -0.4).unwrap(),
        ] {
            let h = model.hamiltonian().unwrap();
            // T H T^-1 with T a permutation: (T H T^-1)[image(i), image(j)] = H[i, j]
            let mut worst = 0.0f64;
            for i in 0..dim {
                for j in 0..dim {
                    worst = worst.max((h.get(image(i), image(j)) - h.get(i, j)).norm());
                }
            }
            assert!(worst < 1e-11);
        }
    }

    #[test]
    fn ising_spectrum_is_even_in_h() {
        let a = eigvalsh(
            &SpinChainModel::ising(6, 0.7)
                .unwrap()
                .hamiltonian()
                .unwrap(),
        )
        .unwrap();
        let b = eigvalsh(
            &SpinChainModel::ising(6, -0.7)
                .unwrap()
                .hamiltonian()
                .unwrap(),
        )
        .unwrap();
        for (x, y) in sorted(a).iter().zip(sorted(b)) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn sector_diagonalization_matches_dense() {
        for model in [
            SpinChainModel::ising(6, 0.9).unwrap(),
            SpinChainModel::xxz(6, 0.5).unwrap(),
            SpinChainModel::with_options(ModelFamily::Xxz { delta: -2.0 }, 5, 0.7, false).unwrap(),
        ] {
            let h = model.hamiltonian().unwrap();
            let dense = eigvalsh(&h).unwrap();
            let spec = model.diagonalize().unwrap();
            for (a, b) in dense.iter().zip(spec.values()) {
                assert!((a - b).abs() < 1e-10);
            }
            assert!(spec.reconstruct().max_abs_diff(&h) < 1e-9);
            assert!(spec.unitarity_error() < 1e-10);
        }
    }

    #[test]
    fn local_hamiltonian_bookkeeping() {
        let (j, h) = (1.3, 0.6);
        let model = SpinChainModel::with_options(ModelFamily::Ising { h }, 4, j, true).unwrap();
        let sub = SubsystemSpec::leading(4, 2).unwrap();
        let ha = model.local_hamiltonian(&sub).unwrap();
        let xx = pauli_string(2, &[(0, Pauli::X), (1, Pauli::X)]).unwrap();
        let z0 = pauli_string(2, &[(0, Pauli::Z)]).unwrap();
        let z1 = pauli_string(2, &[(1, Pauli::Z)]).unwrap();
        let oracle = xx
            .add(&z0.scale(h))
            .unwrap()
            .add(&z1.scale(h))
            .unwrap()
            .scale(-j);
        assert!(ha.max_abs_diff(&oracle) < 1e-15);

        let one = SubsystemSpec::leading(4, 1).unwrap();
        let ha1 = model.local_hamiltonian(&one).unwrap();
        assert!(ha1.max_abs_diff(&HermitianOperator::diagonal(&[-j * h, j * h])) < 1e-15);
        let xxz = SpinChainModel::xxz(4, 0.3).unwrap();
        assert!(xxz.local_hamiltonian(&one).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn hamiltonian_reassembles_from_parts() {
        for model in [
            SpinChainModel::ising(5, 0.4).unwrap(),
            SpinChainModel::xxz(5, 1.7).unwrap(),
        ] {
            for (start, len) in [(0, 2), (3, 3), (4, 1)] {
                let sub = SubsystemSpec::new(5, start, len).unwrap();
                let ha = model.local_hamiltonian(&sub).unwrap();
                let hb = model.complement_hamiltonian(&sub).unwrap().unwrap();
                let hint = model.interaction_hamiltonian(&sub).unwrap();
                let sum = kron(&ha, &HermitianOperator::identity(sub.d_b()))
                    .unwrap()
                    .add(&kron(&HermitianOperator::identity(sub.d_a()), &hb).unwrap())
                    .unwrap()
                    .add(&hint)
                    .unwrap();
                let full = sub.reorder(&model.hamiltonian().unwrap());
                assert!(sum.max_abs_diff(&full) < 1e-12);
            }
        }
    }

    #[test]
    fn subsystem_validation_and_split() {
        assert!(SubsystemSpec::new(4, 4, 1).is_err());
        assert!(SubsystemSpec::new(4, 0, 0).is_err());
        assert!(SubsystemSpec::new(4, 0, 5).is_err());
        let sub = SubsystemSpec::new(4, 3, 2).unwrap();
        assert_eq!(sub.window_sites(), vec![3, 0]);
        assert_eq!(sub.complement_sites(), vec![1, 2]);
        // |s0 s1 s2 s3> = |1 0 1 1>: window (s3, s0) = 11, complement (s1, s2) = 01
        assert_eq!(sub.split(0b1011), (0b11, 0b01));
        let model = SpinChainModel::ising(5, 0.0).unwrap();
        assert!(model.check_subsystem(&sub).is_err());
    }

    #[test]
    fn leading_window_ordering_is_identity() {
        let sub = SubsystemSpec::leading(4, 2).unwrap();
        let perm = sub.bipartition_index();
        assert!(perm.iter().enumerate().all(|(s, &p)| s == p));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let m: SpinChainModel =
            serde_json::from_str(r#"{"family":"xxz","L":6,"J":1.0,"delta":-0.5,"periodic":true}"#)
                .unwrap();
        assert_eq!(m, SpinChainModel::xxz(6, -0.5).unwrap());
        let back: SpinChainModel =
            serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        let defaults: SpinChainModel =
            serde_json::from_str(r#"{"family":"ising","L":4,"h":0.5}"#).unwrap();
        assert_eq!(defaults, SpinChainModel::ising(4, 0.5).unwrap());
        assert!(
            serde_json::from_str::<SpinChainModel>(r#"{"family":"ising","L":4,"delta":1}"#)
                .is_err()
        );
        assert!(
            serde_json::from_str::<SpinChainModel>(r#"{"family":"heisenberg","L":4}"#).is_err()
        );
        assert!(
            serde_json::from_str::<SpinChainModel>(r#"{"family":"ising","L":20,"h":1}"#).is_err()
        );
    }

    #[test]
    fn ising_ferromagnet_ground_doublet() {
        let spec = SpinChainModel::ising(4, 0.0)
            .unwrap()
            .diagonalize()
            .unwrap();
        let parts = linalg::group_degenerate(&spec, spec.default_degeneracy_tol()).unwrap();
        assert_eq!(parts.groups()[0].multiplicity(), 2);
        assert!((parts.groups()[0].energy + 4.0).abs() < 1e-12);
    }
}

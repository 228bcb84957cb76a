//! Quasioptimization `x in K(x)`, `f(x) <= f(y)` for all `y in K(x)`, solved
//! as a GQVI whose operator is the global base of the adjusted normal cone
//! (the dual unit box on the argmin), then checked on a grid.
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::Polytope;
use crate::gqvi::{solve, ConstraintMap, GqviInstance, MovingPolytope, PolytopeOperator, SolveReport, SolveStatus, SolverConfig};
use crate::linalg::{box_grid, norm};
use crate::normal_op::{adjusted_normal_cone, build_atlas_excluding_argmin, global_base, Atlas};
use crate::quasiconvex::{FunctionJson, StepLevelFunction};
use crate::tolerance::ToleranceConfig;

/// Optimality slack for step functions.
pub const TOL_OPT: f64 = 1e-6;
/// Default verification mesh as a fraction of the diameter of fix K.
pub const VERIFY_MESH: f64 = 1.0 / 200.0;

/// `T(x) = [-1, 1]^n` on the argmin, the atlas base `A(x)` elsewhere.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "NormalBaseJson", into = "NormalBaseJson")]
pub struct NormalBaseOperator {
    f: StepLevelFunction,
    atlas: Atlas,
}

#[derive(Serialize, Deserialize)]
struct NormalBaseJson {
    function: FunctionJson,
    atlas: Atlas,
    #[serde(default)]
    tol: ToleranceConfig,
}

fn step_json(f: &StepLevelFunction) -> FunctionJson {
    FunctionJson::Step {
        levels: f.levels().to_vec(),
        polytopes: f.polytopes().to_vec(),
        allow_non_nested: false,
    }
}

fn step_from_json(spec: FunctionJson, tol: ToleranceConfig) -> Result<StepLevelFunction> {
    match spec {
        FunctionJson::Step { levels, polytopes, .. } => StepLevelFunction::new(levels, polytopes, tol),
        FunctionJson::Analytic { .. } => Err(Error::Schema {
            field: "function.type".into(),
            message: "quasioptimization needs a step function".into(),
        }),
    }
}

impl TryFrom<NormalBaseJson> for NormalBaseOperator {
    type Error = Error;

    fn try_from(j: NormalBaseJson) -> Result<Self> {
        build_t(step_from_json(j.function, j.tol)?, j.atlas)
    }
}

impl From<NormalBaseOperator> for NormalBaseJson {
    fn from(op: NormalBaseOperator) -> Self {
        Self {
            function: step_json(&op.f),
            tol: *op.f.tolerances(),
            atlas: op.atlas,
        }
    }
}

impl NormalBaseOperator {
    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn function(&self) -> &StepLevelFunction {
        &self.f
    }

    pub fn atlas(&self) -> &Atlas {
        &self.atlas
    }

    pub fn eval(&self, x: &[f64]) -> Result<Polytope> {
        if self.f.in_argmin(x)? {
            return Polytope::cube(self.dim(), 1.0);
        }
        Ok(global_base(&self.atlas, &self.f, x)?.base)
    }
}

pub fn build_t(f: StepLevelFunction, atlas: Atlas) -> Result<NormalBaseOperator> {
    check_dim(f.dim(), atlas.region().dim())?;
    Ok(NormalBaseOperator { f, atlas })
}

#[derive(Debug, Clone)]
pub struct QuasioptInstance {
    pub f: StepLevelFunction,
    pub k: MovingPolytope,
    pub atlas: Atlas,
    pub solver: SolverConfig,
    /// Verification mesh as a fraction of the diameter of fix K.
    pub verify_mesh: f64,
}

/// `atlas` is either a full atlas or `{"cover_step": h}`, in which case the
/// atlas is built over the box of `K` with the argmin band cut out.
#[derive(Deserialize)]
#[serde(untagged)]
enum AtlasSpec {
    Built(Atlas),
    Params { cover_step: f64 },
}

#[derive(Deserialize)]
struct QuasioptJson {
    function: FunctionJson,
    #[serde(rename = "K")]
    k: MovingPolytope,
    atlas: AtlasSpec,
    #[serde(default)]
    solver: SolverConfig,
    #[serde(default)]
    tol: ToleranceConfig,
    #[serde(default)]
    verify_mesh: Option<f64>,
}

impl QuasioptInstance {
    /// Builds the atlas over the box of `K`, cutting out a `cover_step` band
    /// around the argmin.
    pub fn new(f: StepLevelFunction, k: MovingPolytope, cover_step: f64) -> Result<Self> {
        check_dim(f.dim(), k.dim())?;
        let atlas = build_atlas_excluding_argmin(&f, k.bounds(), cover_step)?;
        let inst = Self {
            f,
            k,
            atlas,
            solver: SolverConfig::default(),
            verify_mesh: VERIFY_MESH,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.f.dim(), self.k.dim())?;
        check_dim(self.f.dim(), self.atlas.region().dim())?;
        let last = self.f.polytopes().last().expect("nonempty family");
        for v in self.k.bounds().vertices()? {
            if !last.contains(v, self.f.tolerances().feas)? {
                return Err(Error::Precondition(format!(
                    "box vertex {v:?} of K lies outside the domain of f"
                )));
            }
        }
        self.k.fixed_point_set()?;
        self.solver.validate()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let j: QuasioptJson = serde_json::from_str(text).map_err(|e| Error::Schema {
            field: "quasiopt instance".into(),
            message: e.to_string(),
        })?;
        let f = step_from_json(j.function, j.tol)?;
        let atlas = match j.atlas {
            AtlasSpec::Built(a) => a,
            AtlasSpec::Params { cover_step } => build_atlas_excluding_argmin(&f, j.k.bounds(), cover_step)?,
        };
        let inst = Self {
            f,
            k: j.k,
            atlas,
            solver: j.solver,
            verify_mesh: j.verify_mesh.unwrap_or(VERIFY_MESH),
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "function": step_json(&self.f),
            "K": self.k,
            "atlas": self.atlas,
            "solver": self.solver,
            "tol": self.f.tolerances(),
            "verify_mesh": self.verify_mesh,
        })
    }

    pub fn gqvi(&self) -> Result<GqviInstance> {
        let op = build_t(self.f.clone(), self.atlas.clone())?;
        let mut g = GqviInstance::new(self.k.clone(), PolytopeOperator::NormalBase(op))?;
        g.solver = self.solver.clone();
        g.tol = *self.f.tolerances();
        Ok(g)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BruteForceBlock {
    pub mesh: f64,
    pub solutions: usize,
    /// Some brute-force solution lies within one mesh cell of `x`.
    pub near_solution: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuasioptReport {
    pub gqvi: SolveReport,
    pub x: Vec<f64>,
    pub value: f64,
    pub grid_min: f64,
    pub in_argmin: bool,
    /// `x*` lies in the adjusted normal cone with norm at least `tol.zero`;
    /// `None` on the argmin, where the operator is the dual unit box.
    pub witness_normal: Option<bool>,
    pub brute_force: BruteForceBlock,
    /// `f(x) <= grid_min + TOL_OPT`, only claimed for a solved GQVI.
    pub verified: bool,
}

/// Lattice over a box, stored per axis, with `f` tabulated at every point.
struct Lattice {
    axes: Vec<Vec<f64>>,
    values: Vec<f64>,
}

impl Lattice {
    fn new(f: &StepLevelFunction, lo: &[f64], hi: &[f64], h: f64) -> Result<Self> {
        let axes: Vec<Vec<f64>> = lo
            .iter()
            .zip(hi)
            .map(|(&l, &u)| box_grid(&[l], &[u], h).into_iter().map(|p| p[0]).collect())
            .collect();
        let mut values = Vec::new();
        for p in box_grid(lo, hi, h) {
            values.push(f.evaluate(&p)?);
        }
        Ok(Self { axes, values })
    }

    fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().zip(&self.axes).map(|(&i, a)| a[i]).collect()
    }

    /// Flat index in `box_grid` order, where the first axis varies fastest.
    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).rev().fold(0, |acc, (&i, a)| acc * a.len() + i)
    }

    /// Minimum of `f` over lattice points of `p`, or `+inf` if there are none.
    fn min_over(&self, p: &Polytope) -> Result<f64> {
        let (lo, hi) = p.bounding_box()?;
        let ranges: Vec<(usize, usize)> = self
            .axes
            .iter()
            .zip(lo.iter().zip(&hi))
            .map(|(a, (&l, &u))| {
                let first = a.partition_point(|&v| v < l - 1e-12);
                let end = a.partition_point(|&v| v <= u + 1e-12);
                (first, end)
            })
            .collect();
        if ranges.iter().any(|(a, b)| a >= b) {
            return Ok(f64::INFINITY);
        }
        let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        let mut best = f64::INFINITY;
        loop {
            let y = self.point(&idx);
            if p.contains_unchecked(&y, 1e-12) {
                best = best.min(self.values[self.flat(&idx)]);
            }
            let mut k = idx.len();
            loop {
                if k == 0 {
                    return Ok(best);
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < ranges[k].1 {
                    break;
                }
                idx[k] = ranges[k].0;
            }
        }
    }
}

fn fix_mesh(inst: &QuasioptInstance, fix: &Polytope) -> Result<f64> {
    Ok((inst.verify_mesh * fix.diameter()?).max(1e-9))
}

/// `min f` over the lattice points of `K(x)` together with its vertices.
fn grid_min(inst: &QuasioptInstance, x: &[f64], h: f64) -> Result<f64> {
    let kx = inst.k.at(x)?;
    let (lo, hi) = kx.bounding_box()?;
    let mut best = f64::INFINITY;
    for y in box_grid(&lo, &hi, h) {
        if kx.contains_unchecked(&y, 1e-12) {
            best = best.min(inst.f.evaluate(&y)?);
        }
    }
    for v in kx.vertices()? {
        best = best.min(inst.f.evaluate(v)?);
    }
    Ok(best)
}

/// Lattice points `x` of the box of `K` (spacing `mesh`) with `x in K(x)` and
/// `f(x) <= f(y) + TOL_OPT` for every lattice point `y` of `K(x)`.
pub fn brute_force_quasiopt(inst: &QuasioptInstance, mesh: f64) -> Result<Vec<Vec<f64>>> {
    if !(mesh > 0.0) {
        return Err(Error::InvalidArgument(format!("mesh {mesh} must be positive")));
    }
    let (lo, hi) = inst.k.bounds().bounding_box()?;
    let lattice = Lattice::new(&inst.f, &lo, &hi, mesh)?;
    let feas = inst.f.tolerances().feas;
    let mut out = Vec::new();
    for (i, x) in box_grid(&lo, &hi, mesh).into_iter().enumerate() {
        let kx = match inst.k.at(&x) {
            Ok(k) => k,
            Err(Error::EmptyPolytope) => continue,
            Err(e) => return Err(e),
        };
        if !kx.contains_unchecked(&x, feas) {
            continue;
        }
        if lattice.values[i] <= lattice.min_over(&kx)? + TOL_OPT {
            out.push(x);
        }
    }
    Ok(out)
}

/// Solves the GQVI with the normal-base operator and checks the answer on a
/// grid of `K(x)` with spacing `verify_mesh * diam(fix K)`.
pub fn solve_quasiopt(inst: &QuasioptInstance) -> Result<QuasioptReport> {
    inst.validate()?;
    let fix = inst.k.fixed_point_set()?;
    let h = fix_mesh(inst, &fix)?;
    let report = solve(&inst.gqvi()?)?;
    if report.status == SolveStatus::Infeasible {
        return Err(Error::Precondition("fix K is empty".into()));
    }
    let x = report.x.clone();
    let value = inst.f.evaluate(&x)?;
    let gmin = grid_min(inst, &x, h)?;
    let in_argmin = inst.f.in_argmin(&x)?;
    let tol = inst.f.tolerances();
    let witness_normal = if in_argmin {
        None
    } else {
        let cone = adjusted_normal_cone(&inst.f, &x)?;
        Some(cone.contains(&report.x_star, tol.cone)? && norm(&report.x_star) >= tol.zero)
    };
    let solutions = brute_force_quasiopt(inst, h)?;
    let cell = h * (x.len() as f64).sqrt() + 1e-12;
    let near_solution = solutions.iter().any(|s| crate::linalg::dist(s, &x) <= cell);
    let solved = report.status == SolveStatus::Solved;
    let optimal = in_argmin || value <= gmin + TOL_OPT;
    Ok(QuasioptReport {
        verified: solved && optimal && witness_normal != Some(false),
        x,
        value,
        grid_min: gmin,
        in_argmin,
        witness_normal,
        brute_force: BruteForceBlock {
            mesh: h,
            solutions: solutions.len(),
            near_solution,
        },
        gqvi: report,
    })
}

//! The six benchmark problems with their parameter sets and discretizations.

use crate::dg::{AngularSpec, BasisKind, Discretization};
use crate::error::{Error, Result};
use crate::fom::{Acceleration, FomMethod, SiConfig};
use crate::mesh::AxisBox;
use crate::problem::{
    Coefficient, DataTerm, Field, FieldTerm, InflowFace, Parameter, Profile, Support,
    TransportProblem,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    Paper,
    Quick,
}

impl std::str::FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Preset::Paper),
            "quick" => Ok(Preset::Quick),
            _ => Err(Error::Config(format!(
                "unknown preset '{s}' (expected paper or quick)"
            ))),
        }
    }
}

/// A registered benchmark.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Benchmark {
    pub name: String,
    pub problem: TransportProblem,
    /// Box bounds of the parameter set, one `[lo, hi]` per component.
    pub bounds: Vec<[f64; 2]>,
    /// Points per component of the uniform training grid.
    pub train_grid: Vec<usize>,
    pub test_count: usize,
    pub tol_sratio: f64,
    pub paper: Discretization,
    pub quick: Discretization,
    pub solver: FomMethod,
    /// Infimum of the absorption cross section over space and parameters.
    pub sigma_a_inf: f64,
}

impl Benchmark {
    pub fn discretization(&self, preset: Preset) -> Discretization {
        match preset {
            Preset::Paper => self.paper,
            Preset::Quick => self.quick,
        }
    }

    /// Tensor grid, first component varying slowest.
    pub fn training_set(&self) -> Vec<Parameter> {
        uniform_grid(&self.bounds, &self.train_grid)
    }

    /// Geometric center of the parameter box.
    pub fn center(&self) -> Parameter {
        self.bounds.iter().map(|b| 0.5 * (b[0] + b[1])).collect()
    }

    pub fn contains(&self, mu: &[f64]) -> bool {
        mu.len() == self.bounds.len()
            && mu
                .iter()
                .zip(&self.bounds)
                .all(|(m, b)| *m >= b[0] && *m <= b[1])
    }

    /// Whether `mu` lies on the boundary of the parameter box (relative tolerance 1e-12).
    pub fn on_boundary(&self, mu: &[f64]) -> bool {
        mu.iter().zip(&self.bounds).any(|(m, b)| {
            let tol = 1e-12 * (b[1] - b[0]).abs().max(1.0);
            (m - b[0]).abs() <= tol || (m - b[1]).abs() <= tol
        })
    }
}

pub fn uniform_grid(bounds: &[[f64; 2]], counts: &[usize]) -> Vec<Parameter> {
    let axes: Vec<Vec<f64>> = bounds
        .iter()
        .zip(counts)
        .map(|(b, &n)| {
            if n == 1 {
                vec![0.5 * (b[0] + b[1])]
            } else {
                (0..n)
                    .map(|i| b[0] + (b[1] - b[0]) * i as f64 / (n - 1) as f64)
                    .collect()
            }
        })
        .collect();
    let mut out: Vec<Parameter> = vec![vec![]];
    for axis in &axes {
        out = out
            .into_iter()
            .flat_map(|p| {
                axis.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

fn term(coefficient: Coefficient, support: Support) -> FieldTerm {
    FieldTerm {
        coefficient,
        field: Field {
            profile: Profile::Constant(1.0),
            support,
        },
    }
}

fn source_only(profile: Profile, support: Support) -> DataTerm {
    DataTerm {
        coefficient: Coefficient::Constant(1.0),
        source: Some(Field { profile, support }),
        inflow: vec![],
    }
}

fn si_dsa() -> FomMethod {
    FomMethod::SourceIteration(SiConfig {
        tol: 1e-12,
        max_iterations: 10_000,
        acceleration: Acceleration::Dsa,
        ..Default::default()
    })
}

fn slab(nx: usize) -> Discretization {
    Discretization::slab(nx, 16)
}

fn plane(n: usize, nt: usize, nxi: usize) -> Discretization {
    Discretization {
        cells: [n, n],
        degree: 1,
        basis: BasisKind::OrthonormalLegendre,
        angular: AngularSpec::Sphere(nt, nxi),
    }
}

pub fn homogeneous_1d() -> Benchmark {
    let problem = TransportProblem {
        dim: 1,
        lower: [0.0, 0.0],
        upper: [4.0, 1.0],
        param_dim: 2,
        scattering: vec![term(Coefficient::component(0, 2), Support::Everywhere)],
        absorption: vec![term(Coefficient::component(1, 2), Support::Everywhere)],
        data: vec![source_only(Profile::Constant(0.01), Support::Everywhere)],
    };
    Benchmark {
        name: "homogeneous-1d".into(),
        problem,
        bounds: vec![[1.0, 2.0], [5.0, 6.0]],
        train_grid: vec![21, 21],
        test_count: 100,
        tol_sratio: 1e-8,
        paper: slab(80),
        quick: slab(80),
        solver: FomMethod::Direct,
        sigma_a_inf: 5.0,
    }
}

pub fn two_material_1d() -> Benchmark {
    let left = vec![AxisBox::interval(0.0, 1.0)];
    let problem = TransportProblem {
        dim: 1,
        lower: [0.0, 0.0],
        upper: [4.0, 1.0],
        param_dim: 2,
        scattering: vec![term(
            Coefficient::component(0, 2),
            Support::Outside(left.clone()),
        )],
        absorption: vec![term(Coefficient::component(1, 2), Support::Inside(left))],
        data: vec![DataTerm {
            coefficient: Coefficient::Constant(1.0),
            source: None,
            inflow: vec![InflowFace {
                axis: 0,
                high_side: false,
                value: 5.0,
            }],
        }],
    };
    Benchmark {
        name: "two-material-1d".into(),
        problem,
        bounds: vec![[90.0, 100.0], [1.0, 2.0]],
        train_grid: vec![101, 21],
        test_count: 100,
        tol_sratio: 1e-10,
        paper: slab(120),
        quick: slab(120),
        solver: FomMethod::Direct,
        sigma_a_inf: 0.0,
    }
}

pub fn varying_scattering_1d() -> Benchmark {
    let problem = TransportProblem {
        dim: 1,
        lower: [0.0, 0.0],
        upper: [4.0, 1.0],
        param_dim: 2,
        scattering: vec![
            term(Coefficient::component(0, 2), Support::Everywhere),
            FieldTerm {
                coefficient: Coefficient::component(1, 2),
                field: Field::everywhere(Profile::Linear {
                    value: 0.0,
                    slope: [1.0, 0.0],
                }),
            },
        ],
        absorption: vec![],
        data: vec![source_only(Profile::Constant(0.01), Support::Everywhere)],
    };
    Benchmark {
        name: "varying-scattering-1d".into(),
        problem,
        bounds: vec![[90.0, 100.0], [90.0, 100.0]],
        train_grid: vec![101, 101],
        test_count: 100,
        tol_sratio: 1e-14,
        paper: slab(80),
        quick: slab(80),
        solver: FomMethod::Direct,
        sigma_a_inf: 0.0,
    }
}

/// Unit cells `[i, i+1] x [j, j+1]` (shifted to the centered domain) that absorb.
/// Layout: a checkerboard in the inner 5x5 block
/// with the center cell holding the source and the cell two above it left open.
pub fn lattice_absorber_cells() -> Vec<(usize, usize)> {
    let mut cells = Vec::new();
    for j in 1..=5 {
        for i in 1..=5 {
            if (i + j) % 2 == 0 && (i, j) != (3, 3) && (i, j) != (3, 5) {
                cells.push((i, j));
            }
        }
    }
    cells
}

fn unit_cell(i: usize, j: usize) -> AxisBox {
    let x = i as f64 - 3.5;
    let y = j as f64 - 3.5;
    AxisBox::new([x, y], [x + 1.0, y + 1.0])
}

pub fn lattice_2d() -> Benchmark {
    let absorbers: Vec<AxisBox> = lattice_absorber_cells()
        .into_iter()
        .map(|(i, j)| unit_cell(i, j))
        .collect();
    let problem = TransportProblem {
        dim: 2,
        lower: [-3.5, -3.5],
        upper: [3.5, 3.5],
        param_dim: 2,
        scattering: vec![term(
            Coefficient::component(0, 2),
            Support::Outside(absorbers.clone()),
        )],
        absorption: vec![term(
            Coefficient::component(1, 2),
            Support::Inside(absorbers),
        )],
        data: vec![source_only(
            Profile::Constant(1.0),
            Support::Inside(vec![unit_cell(3, 3)]),
        )],
    };
    Benchmark {
        name: "lattice-2d".into(),
        problem,
        bounds: vec![[0.5, 1.5], [8.0, 12.0]],
        train_grid: vec![21, 21],
        test_count: 100,
        tol_sratio: 1e-9,
        paper: plane(70, 40, 6),
        // 21 cells keep the unit-cell interfaces on element boundaries
        quick: plane(21, 8, 2),
        solver: si_dsa(),
        sigma_a_inf: 0.0,
    }
}

pub fn line_source_2d() -> Benchmark {
    let problem = TransportProblem {
        dim: 2,
        lower: [0.0, 0.0],
        upper: [1.0, 1.0],
        param_dim: 1,
        scattering: vec![term(Coefficient::component(0, 1), Support::Everywhere)],
        absorption: vec![],
        data: vec![source_only(
            Profile::Gaussian {
                amplitude: 1.0,
                center: [0.5, 0.5],
                rate: 100.0,
            },
            Support::Everywhere,
        )],
    };
    Benchmark {
        name: "line-source-2d".into(),
        problem,
        bounds: vec![[0.5, 5.0]],
        train_grid: vec![101],
        test_count: 20,
        tol_sratio: 1e-7,
        paper: plane(80, 30, 6),
        quick: plane(20, 8, 2),
        solver: si_dsa(),
        sigma_a_inf: 0.0,
    }
}

pub fn pin_cell_2d() -> Benchmark {
    let inner = vec![AxisBox::new([-0.5, -0.5], [0.5, 0.5])];
    let problem = TransportProblem {
        dim: 2,
        lower: [-1.0, -1.0],
        upper: [1.0, 1.0],
        param_dim: 2,
        scattering: vec![
            term(
                Coefficient::Constant(100.0),
                Support::Outside(inner.clone()),
            ),
            term(Coefficient::component(0, 2), Support::Inside(inner.clone())),
        ],
        absorption: vec![term(Coefficient::component(1, 2), Support::Inside(inner))],
        data: vec![source_only(
            Profile::Gaussian {
                amplitude: 1.0,
                center: [0.0, 0.0],
                rate: 100.0,
            },
            Support::Everywhere,
        )],
    };
    Benchmark {
        name: "pin-cell-2d".into(),
        problem,
        bounds: vec![[0.05, 0.5], [0.05, 0.5]],
        train_grid: vec![19, 19],
        test_count: 100,
        tol_sratio: 1e-9,
        paper: plane(80, 30, 6),
        quick: plane(20, 8, 2),
        solver: si_dsa(),
        sigma_a_inf: 0.0,
    }
}

pub fn registry() -> Vec<Benchmark> {
    vec![
        homogeneous_1d(),
        two_material_1d(),
        varying_scattering_1d(),
        lattice_2d(),
        line_source_2d(),
        pin_cell_2d(),
    ]
}

pub fn lookup(name: &str) -> Result<Benchmark> {
    registry()
        .into_iter()
        .find(|b| b.name == name)
        .ok_or_else(|| Error::UnknownProblem(name.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::FomSystem;

    #[test]
    fn affine_term_counts() {
        let q: Vec<(usize, usize)> = registry()
            .iter()
            .map(|b| (b.problem.q_a(), b.problem.q_b()))
            .collect();
        assert_eq!(q, vec![(3, 1), (3, 1), (3, 1), (3, 1), (2, 1), (4, 1)]);
    }

    #[test]
    fn grid_order_and_size() {
        let g = uniform_grid(&[[0.0, 1.0], [5.0, 6.0]], &[3, 2]);
        assert_eq!(g.len(), 6);
        assert_eq!(g[0], vec![0.0, 5.0]);
        assert_eq!(g[1], vec![0.0, 6.0]);
        assert_eq!(g[5], vec![1.0, 6.0]);
        assert_eq!(homogeneous_1d().training_set().len(), 441);
        assert_eq!(two_material_1d().training_set().len(), 2121);
    }

    #[test]
    fn lattice_layout() {
        let cells = lattice_absorber_cells();
        assert_eq!(cells.len(), 11);
        assert!(!cells.contains(&(3, 3)));
        assert!(cells.contains(&(1, 1)) && cells.contains(&(5, 5)));
    }

    #[test]
    fn presets_assemble() {
        for b in registry() {
            let sys = FomSystem::assemble(&b.problem, &b.quick);
            assert!(sys.is_ok(), "{}: {:?}", b.name, sys.err());
        }
    }

    #[test]
    fn full_resolution_sizes() {
        assert_eq!(homogeneous_1d().paper.full_order_len(1), 2560);
        assert_eq!(lattice_2d().paper.full_order_len(2), 4_704_000);
        assert_eq!(line_source_2d().paper.full_order_len(2), 4_608_000);
    }

    #[test]
    fn lookup_unknown() {
        assert!(matches!(lookup("nope"), Err(Error::UnknownProblem(_))));
        assert_eq!(lookup("pin-cell-2d").unwrap().problem.q_a(), 4);
    }
}

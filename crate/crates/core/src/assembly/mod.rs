//! Sparse blocks of the coupled system and their degree-of-freedom maps.
//!
//! Fluid velocity and structure displacement are P2, pressure is P1 on the
//! fluid mesh, and the interface multiplier is component-wise P1 on an
//! [`InterfaceGrid`]. Every block is assembled without Dirichlet conditions
//! and without time-step scaling; the coupling layer applies both.

mod dirichlet;
mod forms;
mod loads;
mod space;

pub use dirichlet::{apply_dirichlet, constrain_symmetric, lift_rhs};
pub use forms::{
    assemble_divdiv, assemble_interface_coupling, assemble_mass, assemble_pressure_coupling,
    assemble_strain_stiffness,
};
pub use loads::{assemble_body_load, assemble_neumann_load};
pub use space::ScalarSpace;

use crate::error::{invalid, Result};
use crate::mesh::{
    build_interface_grid, fluid_box, solid_box, BoundaryTag, InterfaceGrid, TriangleMesh,
};
use crate::sparse::CsrMatrix;

/// Volume rule order; exact for P2 mass matrices on affine cells.
pub const VOLUME_QUADRATURE_ORDER: usize = 5;
/// Segment rule order (three-point Gauss).
pub const SEGMENT_QUADRATURE_ORDER: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalConstants {
    pub rho_f: f64,
    pub rho_s: f64,
    pub nu_f: f64,
    pub nu_s: f64,
    pub lambda: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            rho_f: 1.0,
            rho_s: 1.0,
            nu_f: 1.0,
            nu_s: 1.0,
            lambda: 1.0,
        }
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rho_f", self.rho_f),
            ("rho_s", self.rho_s),
            ("nu_f", self.nu_f),
            ("nu_s", self.nu_s),
        ] {
            if !(v > 0.0) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.lambda >= 0.0) {
            return Err(invalid(format!(
                "lambda must be non-negative, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

/// Which outer sides carry traction data. Every other non-interface side is Dirichlet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryLayout {
    pub fluid_neumann: Vec<BoundaryTag>,
    pub solid_neumann: Vec<BoundaryTag>,
}

impl Default for BoundaryLayout {
    fn default() -> Self {
        Self {
            fluid_neumann: vec![BoundaryTag::Left, BoundaryTag::Right],
            solid_neumann: Vec::new(),
        }
    }
}

impl BoundaryLayout {
    fn dirichlet_tags(neumann: &[BoundaryTag]) -> Vec<BoundaryTag> {
        BoundaryTag::ALL
            .into_iter()
            .filter(|t| *t != BoundaryTag::Interface && !neumann.contains(t))
            .collect()
    }

    pub fn fluid_dirichlet(&self) -> Vec<BoundaryTag> {
        Self::dirichlet_tags(&self.fluid_neumann)
    }

    pub fn solid_dirichlet(&self) -> Vec<BoundaryTag> {
        Self::dirichlet_tags(&self.solid_neumann)
    }
}

/// Sizes of each unknown block and the constrained index sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DofMap {
    pub n_u: usize,
    pub n_p: usize,
    pub n_eta: usize,
    pub n_gamma: usize,
    /// velocity indices (both components) fixed by Dirichlet data; never on the interface
    pub fluid_dirichlet: Vec<usize>,
    pub solid_dirichlet: Vec<usize>,
}

impl DofMap {
    /// Offsets of (u, p, eta, g) in the stacked monolithic vector.
    pub fn offsets(&self) -> [usize; 4] {
        [
            0,
            self.n_u,
            self.n_u + self.n_p,
            self.n_u + self.n_p + self.n_eta,
        ]
    }

    pub fn total(&self) -> usize {
        self.n_u + self.n_p + self.n_eta + self.n_gamma
    }

    /// Size of the stacked (pressure, multiplier) unknown.
    pub fn n_z(&self) -> usize {
        self.n_p + self.n_gamma
    }
}

/// Meshes, function spaces and dof bookkeeping for one (fluid, solid) pair.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub velocity: ScalarSpace,
    pub pressure: ScalarSpace,
    pub displacement: ScalarSpace,
    pub interface: InterfaceGrid,
    pub layout: BoundaryLayout,
    pub dofs: DofMap,
    /// scalar P2 nodes of the fluid mesh that carry Dirichlet data
    pub fluid_dirichlet_nodes: Vec<usize>,
    pub solid_dirichlet_nodes: Vec<usize>,
}

impl Discretization {
    /// Unit fluid and solid boxes with `n` subdivisions per side.
    pub fn unit_boxes(n: usize, coarsening: usize, layout: BoundaryLayout) -> Result<Self> {
        Self::from_meshes(&fluid_box(n)?, &solid_box(n)?, coarsening, layout)
    }

    pub fn from_meshes(
        mesh_f: &TriangleMesh,
        mesh_s: &TriangleMesh,
        coarsening: usize,
        layout: BoundaryLayout,
    ) -> Result<Self> {
        if layout.fluid_neumann.contains(&BoundaryTag::Interface)
            || layout.solid_neumann.contains(&BoundaryTag::Interface)
        {
            return Err(invalid("the interface cannot carry Neumann data"));
        }
        let interface = build_interface_grid(mesh_f, mesh_s, coarsening)?;
        let velocity = ScalarSpace::new(mesh_f, 2)?;
        let pressure = ScalarSpace::new(mesh_f, 1)?;
        let displacement = ScalarSpace::new(mesh_s, 2)?;

        let on_interface = velocity.boundary_dofs(&[BoundaryTag::Interface]);
        let fluid_dirichlet_nodes: Vec<usize> = velocity
            .boundary_dofs(&layout.fluid_dirichlet())
            .into_iter()
            .filter(|d| on_interface.binary_search(d).is_err())
            .collect();
        let solid_dirichlet_nodes = displacement.boundary_dofs(&layout.solid_dirichlet());

        let dofs = DofMap {
            n_u: 2 * velocity.num_dofs(),
            n_p: pressure.num_dofs(),
            n_eta: 2 * displacement.num_dofs(),
            n_gamma: 2 * interface.num_nodes(),
            fluid_dirichlet: velocity.vector_dofs(&fluid_dirichlet_nodes),
            solid_dirichlet: displacement.vector_dofs(&solid_dirichlet_nodes),
        };
        Ok(Self {
            velocity,
            pressure,
            displacement,
            interface,
            layout,
            dofs,
            fluid_dirichlet_nodes,
            solid_dirichlet_nodes,
        })
    }

    /// Vector Dirichlet values of `f` at the constrained velocity dofs.
    pub fn fluid_dirichlet_values(&self, f: impl Fn(f64, f64) -> [f64; 2]) -> Vec<f64> {
        dirichlet_values(&self.velocity, &self.fluid_dirichlet_nodes, f)
    }

    pub fn solid_dirichlet_values(&self, f: impl Fn(f64, f64) -> [f64; 2]) -> Vec<f64> {
        dirichlet_values(&self.displacement, &self.solid_dirichlet_nodes, f)
    }
}

fn dirichlet_values(
    space: &ScalarSpace,
    nodes: &[usize],
    f: impl Fn(f64, f64) -> [f64; 2],
) -> Vec<f64> {
    let vals: Vec<[f64; 2]> = nodes
        .iter()
        .map(|&i| {
            let p = space.coords()[i];
            f(p[0], p[1])
        })
        .collect();
    vals.iter()
        .map(|v| v[0])
        .chain(vals.iter().map(|v| v[1]))
        .collect()
}

/// Every raw block of the coupled system.
#[derive(Clone, Debug)]
pub struct BlockOperatorSet {
    pub disc: Discretization,
    pub constants: PhysicalConstants,
    pub mass_f: CsrMatrix,
    pub stiff_f: CsrMatrix,
    /// `N_u x N_p`
    pub pressure: CsrMatrix,
    pub mass_s: CsrMatrix,
    pub stiff_s: CsrMatrix,
    pub divdiv: CsrMatrix,
    /// `N_gamma x N_u`
    pub g_f: CsrMatrix,
    /// `N_gamma x N_eta`
    pub g_s: CsrMatrix,
}

impl BlockOperatorSet {
    pub fn assemble(disc: Discretization, constants: PhysicalConstants) -> Result<Self> {
        constants.validate()?;
        let mass_f = assemble_mass(&disc.velocity, constants.rho_f)?;
        let stiff_f = assemble_strain_stiffness(&disc.velocity, constants.nu_f)?;
        let pressure = assemble_pressure_coupling(&disc.velocity, &disc.pressure)?;
        let mass_s = assemble_mass(&disc.displacement, constants.rho_s)?;
        let stiff_s = assemble_strain_stiffness(&disc.displacement, constants.nu_s)?;
        let divdiv = assemble_divdiv(&disc.displacement, constants.lambda)?;
        let g_f = assemble_interface_coupling(&disc.velocity, &disc.interface)?;
        let g_s = assemble_interface_coupling(&disc.displacement, &disc.interface)?;
        Ok(Self {
            disc,
            constants,
            mass_f,
            stiff_f,
            pressure,
            mass_s,
            stiff_s,
            divdiv,
            g_f,
            g_s,
        })
    }

    pub fn dofs(&self) -> &DofMap {
        &self.disc.dofs
    }
}

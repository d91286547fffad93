use std::fmt;
use std::str::FromStr;

use super::ReferenceFrame;
use crate::error::{Error, Result};
use crate::graph::CellGraph;
use crate::linalg::{pca3, Vec3};
use crate::scalar::Real;
use crate::volume::{CellClass, LabelTable};

/// Landmark rule used to place the per-specimen reference frame.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FrameMethod {
    /// Origin at the L1 center of mass, axes from the integument symmetry line and fu.
    LabelSurf,
    /// Same axes as `LabelSurf`, origin at the fu center of mass.
    LabelFu,
    /// Origin at the es center of mass, acquisition axes.
    EsTrivial,
    /// Origin at the es center of mass, principal axes of all cell centers.
    EsPca,
    /// Origin at the mean cell center, acquisition axes.
    Trivial,
}

impl FrameMethod {
    pub const ALL: [FrameMethod; 5] = [
        FrameMethod::LabelSurf,
        FrameMethod::LabelFu,
        FrameMethod::EsTrivial,
        FrameMethod::EsPca,
        FrameMethod::Trivial,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FrameMethod::LabelSurf => "label-surf",
            FrameMethod::LabelFu => "label-fu",
            FrameMethod::EsTrivial => "es-trivial",
            FrameMethod::EsPca => "es-pca",
            FrameMethod::Trivial => "trivial",
        }
    }
}

impl fmt::Display for FrameMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FrameMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FrameMethod::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown frame method {s}")))
    }
}

/// Volume-weighted center of mass of all cells labelled `class`.
pub fn tissue_com<T: Real>(g: &CellGraph<T>, labels: &LabelTable, class: CellClass) -> Option<Vec3<T>> {
    let mut sum = Vec3::zero();
    let mut mass = T::zero();
    for node in g.nodes() {
        if labels.get(node.cell_id) == Some(class.id()) {
            sum = sum + node.com.scale(node.volume);
            mass += node.volume;
        }
    }
    (mass > T::zero()).then(|| sum.scale(T::one() / mass))
}

fn require_com<T: Real>(g: &CellGraph<T>, labels: &LabelTable, class: CellClass) -> Result<Vec3<T>> {
    tissue_com(g, labels, class).ok_or(Error::MissingTissue(class.name()))
}

fn require_labels(labels: Option<&LabelTable>) -> Result<&LabelTable> {
    labels.ok_or_else(|| Error::Invalid("frame method needs a label table".into()))
}

/// Label-based axes: main axis through the L2, L3, L4, es, nu centroids
/// (total least squares, pointing to nu), second axis toward fu.
fn label_axes<T: Real>(g: &CellGraph<T>, labels: &LabelTable) -> Result<[Vec3<T>; 3]> {
    let l1 = require_com(g, labels, CellClass::L1)?;
    let fu = require_com(g, labels, CellClass::Fu)?;
    let nu = require_com(g, labels, CellClass::Nu)?;
    let mut centroids = Vec::with_capacity(5);
    for class in [CellClass::L2, CellClass::L3, CellClass::L4, CellClass::Es, CellClass::Nu] {
        centroids.push(require_com(g, labels, class)?);
    }
    let pca = pca3(&centroids);
    let spread = pca.variances[0];
    if !(spread > T::zero()) {
        return Err(Error::Degenerate("integument centroids coincide".into()));
    }
    let mut a1 = Vec3(pca.axes[0]).try_normalize(T::zero()).ok_or_else(|| {
        Error::Degenerate("no principal direction for integument centroids".into())
    })?;
    if a1.dot(nu - pca.mean) < T::zero() {
        a1 = -a1;
    }
    let to_fu = fu - l1;
    let ortho = to_fu - a1.scale(to_fu.dot(a1));
    let scale = to_fu.norm();
    let a2 = ortho
        .try_normalize(T::lit(1e-9) * scale)
        .ok_or_else(|| Error::Degenerate("fu lies on the main axis".into()))?;
    let a3 = a1.cross(a2);
    Ok([a1, a2, a3])
}

fn all_cells_com<T: Real>(g: &CellGraph<T>) -> Vec3<T> {
    let mut sum = Vec3::zero();
    let mut mass = T::zero();
    for node in g.nodes() {
        sum = sum + node.com.scale(node.volume);
        mass += node.volume;
    }
    if mass > T::zero() {
        sum.scale(T::one() / mass)
    } else {
        Vec3::zero()
    }
}

/// Principal axes of all cell centers, variance-descending, each with a
/// nonnegative component along the matching acquisition axis; the third is
/// flipped when needed to keep the basis right-handed.
pub(crate) fn pca_axes_of_coms<T: Real>(g: &CellGraph<T>) -> ([Vec3<T>; 3], [T; 3]) {
    let pca = pca3(&g.coms());
    let mut axes = [Vec3(pca.axes[0]), Vec3(pca.axes[1]), Vec3(pca.axes[2])];
    for (k, a) in axes.iter_mut().enumerate() {
        if a[k] < T::zero() {
            *a = -*a;
        }
    }
    if axes[0].cross(axes[1]).dot(axes[2]) < T::zero() {
        axes[2] = -axes[2];
    }
    (axes, pca.variances)
}

/// Computes the specimen reference frame with the chosen landmark rule.
pub fn global_frame<T: Real>(
    g: &CellGraph<T>,
    labels: Option<&LabelTable>,
    method: FrameMethod,
) -> Result<ReferenceFrame<T>> {
    let (origin, axes) = match method {
        FrameMethod::LabelSurf | FrameMethod::LabelFu => {
            let labels = require_labels(labels)?;
            let axes = label_axes(g, labels)?;
            let origin = if method == FrameMethod::LabelSurf {
                require_com(g, labels, CellClass::L1)?
            } else {
                require_com(g, labels, CellClass::Fu)?
            };
            (origin, axes)
        }
        FrameMethod::EsTrivial => {
            let labels = require_labels(labels)?;
            let es = require_com(g, labels, CellClass::Es)?;
            return Ok(ReferenceFrame::identity(es));
        }
        FrameMethod::EsPca => {
            let labels = require_labels(labels)?;
            let es = require_com(g, labels, CellClass::Es)?;
            (es, pca_axes_of_coms(g).0)
        }
        FrameMethod::Trivial => return Ok(ReferenceFrame::identity(all_cells_com(g))),
    };
    ReferenceFrame::new(origin, [axes[0].0, axes[1].0, axes[2].0])
}

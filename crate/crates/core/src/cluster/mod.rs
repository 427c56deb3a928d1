//! Partitions and the two clustering routes: map-equation optimization for
//! sparse graphs, and agglomeration plus a branch cut for cosine matrices.

mod hierarchy;
mod infomap;
mod mapeq;
mod partition;
mod treecut;

pub use hierarchy::{
    agglomerate, agglomerate_with, from_condensed, read_dendrogram, write_dendrogram, Dendrogram, Linkage, Merge,
};
pub use infomap::{infomap_partition, infomap_with, InfomapOptions};
pub use mapeq::{map_equation, MapEquationScore, ModuleTerm};
pub use partition::{read_partition, write_partition, Partition};
pub use treecut::{dynamic_tree_cut, TreeCut};

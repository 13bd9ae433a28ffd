//! Spectral embedding of 3D voxel objects into 2D images.
//!
//! Occupied voxels become nodes of an adjacency graph. The eigenvectors of
//! the second and third smallest eigenvalues of its Laplacian give every
//! voxel a planar position, and the plane is cut into `dim`×`dim` equal
//! squares whose pixel intensity is the total voxel value landing in them.
//!
//! ```
//! use voxel_spectral::{embed_grid, PipelineConfig, VoxelGrid};
//!
//! let mut grid = VoxelGrid::new(4).unwrap();
//! for x in 0..4 {
//!     grid.set([x, 0, 0], 1.0).unwrap();
//! }
//! let config = PipelineConfig { dim: 8, ..Default::default() };
//! let (image, report) = embed_grid(&grid, &config).unwrap();
//! assert_eq!(image.mass(), 4.0);
//! assert_eq!(report.node_count, 4);
//! ```

pub mod eigen;
pub mod eval;
pub mod graph;
pub mod image_io;
pub mod layout;
pub mod mesh;
pub mod pipeline;
pub mod selftest;
pub mod sparse;
pub mod voxel;

pub use eigen::{dense_eigen_oracle, smallest_nontrivial_pairs, EigenError, EigenPair, SolveSettings, Spectrum};
pub use graph::{bridge_components, build_adjacency_graph, build_knn_graph, connected_components, Connectivity, Graph};
pub use image_io::{write_csv, write_pgm, ImageFormat, ImageWriteSettings, Scaling};
pub use layout::{bin_index, rasterize, spectral_layout, EmbeddedImage, SpectralCoords};
pub use mesh::{parse_off, write_off, Mesh};
pub use pipeline::{embed_grid, embed_mesh, EmbedError, EmbedReport, PipelineConfig};
pub use sparse::{laplacian, SparseSymMatrix};
pub use voxel::{normalize_mesh, parse_voxel_text, voxelize_surface, VoxelGrid};

//! Newest vertex bisection and red refinement of a triangulation.

use hjb_c0ip::mesh::EdgeTopology;
use hjb_c0ip::Mesh;

fn describe(label: &str, mesh: &Mesh) {
    let topo = EdgeTopology::build(mesh).expect("conforming mesh");
    println!(
        "{label:>24}: {:5} triangles, {:5} vertices, {:5} interior edges, h_max {:.4}, min angle {:.2} deg",
        mesh.num_triangles(),
        mesh.num_vertices(),
        topo.interior.len(),
        mesh.max_diameter(),
        mesh.min_angle().to_degrees()
    );
}

fn main() -> hjb_c0ip::Result<()> {
    let mut mesh = Mesh::unit_square(2);
    describe("initial", &mesh);
    for round in 1..=8 {
        // refine the triangles touching the origin
        let marked: Vec<usize> = (0..mesh.num_triangles())
            .filter(|&t| mesh.corners(t).iter().any(|c| c[0] == 0.0 && c[1] == 0.0))
            .collect();
        mesh = mesh.bisect_marked(&marked, &[]);
        describe(&format!("corner bisection {round}"), &mesh);
    }
    describe("red refinement", &mesh.uniform_refine());

    let pentagon = Mesh::convex_polygon(&[[0.0, 0.0], [1.0, 0.0], [1.3, 0.8], [0.4, 1.2], [-0.3, 0.6]])?;
    describe("pentagon", &pentagon);

    let mut text = Vec::new();
    mesh.write_to(&mut text)?;
    let back = Mesh::read_from(text.as_slice())?;
    assert_eq!(back.triangles(), mesh.triangles());
    println!("mesh file: {} bytes, round trip ok", text.len());
    Ok(())
}

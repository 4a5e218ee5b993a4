use multipolar::graph::{
    exact_average_path_length, generate_watts_strogatz, read_edge_list, sampled_average_path_length, write_edge_list,
    WattsStrogatzParams,
};

#[test]
fn exact_path_length_regression_pin() {
    // Computed once by all-pairs BFS on this exact graph.
    let g = generate_watts_strogatz(&WattsStrogatzParams::new(1000, 8, 0.2, 7)).unwrap();
    let exact = exact_average_path_length(&g).unwrap();
    assert!((exact - 4.3114034034034034).abs() < 1e-12, "{exact}");
}

#[test]
fn sampled_tracks_exact() {
    for seed in 0..3 {
        let g = generate_watts_strogatz(&WattsStrogatzParams::new(2000, 8, 0.2, seed)).unwrap();
        let exact = exact_average_path_length(&g).unwrap();
        let sampled = sampled_average_path_length(&g, 200, seed + 100).unwrap();
        assert!((sampled - exact).abs() / exact < 0.05, "{sampled} vs {exact}");
        assert_eq!(sampled_average_path_length(&g, 2000, seed).unwrap(), exact);
    }
}

#[test]
fn serialized_bytes_are_deterministic() {
    let p = WattsStrogatzParams::new(3000, 8, 0.2, 12);
    let bytes = |p: &WattsStrogatzParams| {
        let mut buf = Vec::new();
        write_edge_list(&generate_watts_strogatz(p).unwrap(), &mut buf).unwrap();
        buf
    };
    let a = bytes(&p);
    assert_eq!(a, bytes(&p));
    assert_eq!(read_edge_list(a.as_slice()).unwrap(), generate_watts_strogatz(&p).unwrap());
}

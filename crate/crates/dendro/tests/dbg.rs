#[test]
fn dbg_tree_maps() {
    use dendro::*;
    let host = tree::Tree::corolla(2);
    let eta = tree::Tree::eta("e");
    let maps = kan::tree_maps(&host, &eta);
    eprintln!("maps: {maps:?}");
    let x = kan::DendSet::representable(&host);
    eprintln!("dendrices: {:?}", x.dendrices(&eta));
}

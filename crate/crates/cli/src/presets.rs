//! Built-in scenario presets, one per reference figure, embedded so the
//! binary works from any directory. The same files ship under
//! `crates/cli/presets/`.

pub const PRESETS: &[(&str, &str)] = &[
    ("fig1a", include_str!("../presets/fig1a.toml")),
    ("fig1b", include_str!("../presets/fig1b.toml")),
    ("fig1c", include_str!("../presets/fig1c.toml")),
    ("fig1d", include_str!("../presets/fig1d.toml")),
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4a", include_str!("../presets/fig4a.toml")),
    ("fig4b", include_str!("../presets/fig4b.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("fig7", include_str!("../presets/fig7.toml")),
    ("fig8", include_str!("../presets/fig8.toml")),
    ("fig9", include_str!("../presets/fig9.toml")),
    ("fig10a", include_str!("../presets/fig10a.toml")),
    ("fig10b", include_str!("../presets/fig10b.toml")),
    ("fig11", include_str!("../presets/fig11.toml")),
    ("fig12", include_str!("../presets/fig12.toml")),
    ("fig13", include_str!("../presets/fig13.toml")),
    ("fig14", include_str!("../presets/fig14.toml")),
    ("fig15", include_str!("../presets/fig15.toml")),
    ("fig16", include_str!("../presets/fig16.toml")),
];

pub fn lookup(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn names() -> String {
    PRESETS.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
}

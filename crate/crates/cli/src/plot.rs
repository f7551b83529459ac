//! gnuplot scripts that plot the CSV files written next to them.

use std::path::Path;

use spdc_core::{JointSpectralAmplitude, ScanTable};

fn name(csv: &Path) -> String {
    csv.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn scan(csv: &Path, table: &ScanTable) -> String {
    let file = name(csv);
    let curves: Vec<String> = table
        .columns
        .iter()
        .enumerate()
        .map(|(k, c)| format!("'{file}' using 1:{} with lines title '{c}'", k + 2))
        .collect();
    format!(
        "set datafile separator ','\nset key autotitle columnhead\n\
         set xlabel 'temperature (degC)'\nset ylabel 'wavelength (nm)'\n\
         set title '{} {}'\nplot {}\n",
        table.crystal,
        table.condition.label(),
        curves.join(", \\\n     ")
    )
}

pub fn jsa(csv: &Path, jsa: &JointSpectralAmplitude) -> String {
    let ((s_lo, s_hi), (i_lo, i_hi)) = jsa.grid.nm_ranges();
    format!(
        "set datafile separator ','\nset xlabel 'idler column index ({i_hi:.2} to {i_lo:.2} nm)'\n\
         set ylabel 'signal row index ({s_hi:.2} to {s_lo:.2} nm)'\nset size square\n\
         plot '{}' matrix with image notitle\n",
        name(csv)
    )
}

pub fn hom(csv: &Path) -> String {
    format!(
        "set datafile separator ','\nset key autotitle columnhead\n\
         set xlabel 'delay (fs)'\nset ylabel 'coincidence probability'\nset yrange [0:1]\n\
         plot '{}' using 1:2 with lines notitle\n",
        name(csv)
    )
}

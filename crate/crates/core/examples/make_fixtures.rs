//! Writes the bundled demo datasets to `data/`.

use std::fs;

use biplot_motion::fixtures;

fn main() -> std::io::Result<()> {
    fs::create_dir_all("data")?;
    fs::write("data/gapminder_continent.csv", fixtures::gapminder_csv())?;
    fs::write("data/climate.csv", fixtures::climate_csv(3, 1))?;
    println!("wrote data/gapminder_continent.csv and data/climate.csv");
    Ok(())
}

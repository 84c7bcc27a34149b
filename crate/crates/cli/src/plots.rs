//! Gnuplot scripts written next to the CSV files. Each script reads only
//! files of the same run and renders a PNG.

fn header(png: &str) -> String {
    format!("set datafile separator ','\nset terminal pngcairo size 900,650\nset output '{png}.png'\nset key off\n")
}

pub fn classical() -> String {
    let mut s = header("classical");
    s.push_str(
        "set xlabel 'E'\nset ylabel 'phase-space volume derivative'\n\
         plot 'classical.csv' every ::1 using 1:3 with lines lw 2, \\\n     \
         'stationary.csv' every ::1 using 1:(0) with points pt 7\n",
    );
    s
}

pub fn flow(name: &str, title: &str) -> String {
    let mut s = header(name);
    s += &format!("set title '{title}'\nset xlabel 'lambda'\nset ylabel 'E'\n");
    s.push_str(
        "stats 'flow.csv' every ::1 using 3 nooutput name 'E'\n\
         stats 'flow.csv' every ::1 using 2 nooutput name 'L'\n\
         plot for [i=0:int(L_max)] 'flow.csv' every ::1 using 1:($2 == i ? $3 : 1/0) with lines lc 'navy' lw 1, \\\n     \
         'critical.csv' every ::1 using 1:2 with lines dt 2 lc 'black', \\\n     \
         '' every ::1 using 1:3 with lines dt 2 lc 'black', \\\n     \
         '' every ::1 using 1:4 with lines dt 3 lc 'red', \\\n     \
         'loci.csv' every ::1 using 1:(E_min):(0):(E_max - E_min) with vectors nohead dt 2 lc 'gray'\n",
    );
    s
}

pub fn thermo() -> String {
    let mut s = header("thermo");
    s.push_str(
        "set xlabel 'lambda'\nset ylabel 'T'\nset pm3d map\nset key on\n\
         splot 'thermo.csv' every ::1 using 1:2:4 with pm3d title 'S', \\\n      \
         'separatrix.csv' every ::1 using 2:1:(0) with lines lw 2 lc 'white' title 'separatrix'\n",
    );
    s
}

pub fn density(panels: usize) -> String {
    let mut s = header("density");
    s += "set xlabel 'E'\nset ylabel 'level density'\n";
    if panels > 1 {
        s += &format!("set multiplot layout {panels},1\n");
        for p in 0..panels {
            s += &format!(
                "plot 'density_{p:02}.csv' every ::1 using 1:3 with steps, 'markers_{p:02}.csv' every ::1 using 1:(0) with points pt 7\n"
            );
        }
        s += "unset multiplot\n";
    } else {
        s += "plot 'density.csv' every ::1 using 1:3 with steps, 'markers.csv' every ::1 using 1:(0) with points pt 7\n";
    }
    s
}

pub fn wavefunction(two_d: bool) -> String {
    let mut s = header("wavefunction");
    if two_d {
        s += "set pm3d map\nset size ratio -1\nsplot 'wavefunction.csv' every ::1 using 3:4:5 with pm3d\n";
    } else {
        s += "set xlabel 'x'\nset ylabel '|psi|^2'\nplot 'wavefunction.csv' every ::1 using 3:4 with lines\n";
    }
    s
}

pub fn fig2() -> String {
    let mut s = header("fig2");
    s.push_str(
        "set multiplot layout 2,1\nset xlabel 'lambda'\nset ylabel 'E'\n\
         stats 'flow.csv' every ::1 using 2 nooutput name 'L'\n\
         plot for [i=0:int(L_max)] 'flow.csv' every ::1 using 1:($2 == i ? $3 : 1/0) with lines lc 'navy'\n\
         set xlabel 'x'\nset ylabel '|psi|^2'\n\
         plot 'wavefunction.csv' every ::1 using 3:4 with lines\nunset multiplot\n",
    );
    s
}

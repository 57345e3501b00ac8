//! The bundled geography database and question corpus.
//!
//! Facts are written from a compact literal description; questions come from
//! templates instantiated over the entities. A handful of sentences are
//! pinned verbatim because other parts of the test suite expect them.

use std::fmt::Write as _;

/// name, capital, population, area (km2), neighbors
pub const STATES: &[(&str, &str, f64, f64, &str)] = &[
    ("Alabama", "Montgomery", 3894000.0, 135767.0, "Florida;Georgia;Tennessee;Mississippi"),
    ("Alaska", "Juneau", 401800.0, 1723337.0, ""),
    ("Arizona", "Phoenix", 2718000.0, 295234.0, "California;Nevada;Utah;New Mexico"),
    ("Arkansas", "Little Rock", 2286000.0, 137732.0, "Missouri;Tennessee;Mississippi;Louisiana;Texas;Oklahoma"),
    ("California", "Sacramento", 23667000.0, 423967.0, "Oregon;Nevada;Arizona"),
    ("Colorado", "Denver", 2889000.0, 269601.0, "Wyoming;Nebraska;Kansas;Oklahoma;New Mexico;Utah"),
    ("Connecticut", "Hartford", 3107000.0, 14357.0, "New York;Massachusetts;Rhode Island"),
    ("Delaware", "Dover", 594000.0, 6446.0, "Maryland;Pennsylvania;New Jersey"),
    ("Florida", "Tallahassee", 9746000.0, 170312.0, "Georgia;Alabama"),
    ("Georgia", "Atlanta", 5463000.0, 153910.0, "Florida;Alabama;Tennessee;North Carolina;South Carolina"),
    ("Hawaii", "Honolulu", 964000.0, 28313.0, ""),
    ("Idaho", "Boise", 944000.0, 216443.0, "Montana;Wyoming;Utah;Nevada;Oregon;Washington"),
    ("Illinois", "Springfield", 11427000.0, 149995.0, "Wisconsin;Iowa;Missouri;Kentucky;Indiana"),
    ("Indiana", "Indianapolis", 5490000.0, 94326.0, "Michigan;Ohio;Kentucky;Illinois"),
    ("Iowa", "Des Moines", 2914000.0, 145746.0, "Minnesota;Wisconsin;Illinois;Missouri;Nebraska;South Dakota"),
    ("Kansas", "Topeka", 2364000.0, 213100.0, "Nebraska;Missouri;Oklahoma;Colorado"),
    ("Kentucky", "Frankfort", 3661000.0, 104656.0, "Indiana;Ohio;West Virginia;Virginia;Tennessee;Missouri;Illinois"),
    ("Louisiana", "Baton Rouge", 4206000.0, 135659.0, "Texas;Arkansas;Mississippi"),
    ("Maine", "Augusta", 1125000.0, 91633.0, "New Hampshire"),
    ("Maryland", "Annapolis", 4217000.0, 32131.0, "Virginia;West Virginia;Pennsylvania;Delaware"),
    ("Massachusetts", "Boston", 5737000.0, 27336.0, "Rhode Island;Connecticut;New York;New Hampshire;Vermont"),
    ("Michigan", "Lansing", 9262000.0, 250487.0, "Ohio;Indiana;Wisconsin"),
    ("Minnesota", "Saint Paul", 4076000.0, 225163.0, "Wisconsin;Iowa;South Dakota;North Dakota"),
    ("Mississippi", "Jackson", 2521000.0, 125438.0, "Louisiana;Arkansas;Tennessee;Alabama"),
    ("Missouri", "Jefferson City", 4917000.0, 180540.0, "Iowa;Illinois;Kentucky;Tennessee;Arkansas;Oklahoma;Kansas;Nebraska"),
    ("Montana", "Helena", 787000.0, 380831.0, "North Dakota;South Dakota;Wyoming;Idaho"),
    ("Nebraska", "Lincoln", 1570000.0, 200330.0, "South Dakota;Iowa;Missouri;Kansas;Colorado;Wyoming"),
    ("Nevada", "Carson City", 800000.0, 286380.0, "Idaho;Utah;Arizona;California;Oregon"),
    ("New Hampshire", "Concord", 921000.0, 24214.0, "Vermont;Maine;Massachusetts"),
    ("New Jersey", "Trenton", 7365000.0, 22591.0, "Delaware;Pennsylvania;New York"),
    ("New Mexico", "Santa Fe", 1303000.0, 314917.0, "Arizona;Colorado;Oklahoma;Texas"),
    ("New York", "Albany", 17558000.0, 141297.0, "New Jersey;Pennsylvania;Vermont;Massachusetts;Connecticut"),
    ("North Carolina", "Raleigh", 5882000.0, 139391.0, "Virginia;Tennessee;Georgia;South Carolina"),
    ("North Dakota", "Bismarck", 653000.0, 183108.0, "Minnesota;South Dakota;Montana"),
    ("Ohio", "Columbus", 10798000.0, 116098.0, "Pennsylvania;West Virginia;Kentucky;Indiana;Michigan"),
    ("Oklahoma", "Oklahoma City", 3025000.0, 181037.0, "Kansas;Missouri;Arkansas;Texas;New Mexico;Colorado"),
    ("Oregon", "Salem", 2633000.0, 254799.0, "Washington;Idaho;Nevada;California"),
    ("Pennsylvania", "Harrisburg", 11864000.0, 119280.0, "New York;New Jersey;Delaware;Maryland;West Virginia;Ohio"),
    ("Rhode Island", "Providence", 947000.0, 4001.0, "Connecticut;Massachusetts"),
    ("South Carolina", "Columbia", 3122000.0, 82933.0, "Georgia;North Carolina"),
    ("South Dakota", "Pierre", 691000.0, 199729.0, "North Dakota;Minnesota;Iowa;Nebraska;Wyoming;Montana"),
    ("Tennessee", "Nashville", 4591000.0, 109153.0, "Kentucky;Virginia;North Carolina;Georgia;Alabama;Mississippi;Arkansas;Missouri"),
    ("Texas", "Austin", 14229000.0, 695662.0, "New Mexico;Oklahoma;Arkansas;Louisiana"),
    ("Utah", "Salt Lake City", 1461000.0, 219882.0, "Idaho;Wyoming;Colorado;Arizona;Nevada"),
    ("Vermont", "Montpelier", 511000.0, 24906.0, "New York;New Hampshire;Massachusetts"),
    ("Virginia", "Richmond", 5347000.0, 110787.0, "North Carolina;Tennessee;Kentucky;West Virginia;Maryland"),
    ("Washington", "Olympia", 4132000.0, 184661.0, "Idaho;Oregon"),
    ("West Virginia", "Charleston", 1950000.0, 62756.0, "Ohio;Pennsylvania;Maryland;Virginia;Kentucky"),
    ("Wisconsin", "Madison", 4706000.0, 169635.0, "Michigan;Minnesota;Iowa;Illinois"),
    ("Wyoming", "Cheyenne", 470000.0, 253335.0, "Montana;South Dakota;Nebraska;Colorado;Utah;Idaho"),
];

/// Non-capital cities: name, state, population.
pub const EXTRA_CITIES: &[(&str, &str, f64)] = &[
    ("New York", "New York", 7071000.0),
    ("Los Angeles", "California", 2966000.0),
    ("Chicago", "Illinois", 3005000.0),
    ("Houston", "Texas", 1595000.0),
    ("Philadelphia", "Pennsylvania", 1688000.0),
    ("Detroit", "Michigan", 1203000.0),
    ("San Antonio", "Texas", 785000.0),
    ("San Diego", "California", 875000.0),
    ("San Jose", "California", 629000.0),
    ("San Francisco", "California", 678000.0),
    ("Memphis", "Tennessee", 646000.0),
    ("Baltimore", "Maryland", 786000.0),
    ("Dallas", "Texas", 904000.0),
    ("Seattle", "Washington", 493000.0),
    ("Miami", "Florida", 346000.0),
    ("Washington", "Pennsylvania", 15000.0),
    ("New Orleans", "Louisiana", 557000.0),
    ("Cleveland", "Ohio", 573000.0),
    ("Tucson", "Arizona", 330000.0),
    ("Portland", "Oregon", 366000.0),
];

/// Capital populations, keyed by capital name.
pub const CAPITAL_POPULATIONS: &[(&str, f64)] = &[
    ("Montgomery", 178000.0), ("Juneau", 19500.0), ("Phoenix", 789000.0),
    ("Little Rock", 158000.0), ("Sacramento", 275000.0), ("Denver", 492000.0),
    ("Hartford", 136000.0), ("Dover", 23500.0), ("Tallahassee", 81500.0),
    ("Atlanta", 425000.0), ("Honolulu", 365000.0), ("Boise", 102000.0),
    ("Springfield", 100000.0), ("Indianapolis", 700000.0), ("Des Moines", 191000.0),
    ("Topeka", 115000.0), ("Frankfort", 26000.0), ("Baton Rouge", 219000.0),
    ("Augusta", 21800.0), ("Annapolis", 31700.0), ("Boston", 563000.0),
    ("Lansing", 130000.0), ("Saint Paul", 270000.0), ("Jackson", 203000.0),
    ("Jefferson City", 33600.0), ("Helena", 23900.0), ("Lincoln", 172000.0),
    ("Carson City", 32000.0), ("Concord", 30400.0), ("Trenton", 92100.0),
    ("Santa Fe", 49000.0), ("Albany", 102000.0), ("Raleigh", 150000.0),
    ("Bismarck", 44500.0), ("Columbus", 565000.0), ("Oklahoma City", 403000.0),
    ("Salem", 89200.0), ("Harrisburg", 53300.0), ("Providence", 157000.0),
    ("Columbia", 101000.0), ("Pierre", 11900.0), ("Nashville", 456000.0),
    ("Austin", 345000.0), ("Salt Lake City", 163000.0), ("Montpelier", 8200.0),
    ("Richmond", 219000.0), ("Olympia", 27400.0), ("Charleston", 63900.0),
    ("Madison", 170000.0), ("Cheyenne", 47300.0),
];

/// name, length (km), states traversed.
pub const RIVERS: &[(&str, f64, &str)] = &[
    ("Mississippi", 3778.0, "Minnesota;Wisconsin;Iowa;Illinois;Missouri;Kentucky;Tennessee;Arkansas;Mississippi;Louisiana"),
    ("Missouri", 3968.0, "Montana;North Dakota;South Dakota;Nebraska;Iowa;Kansas;Missouri"),
    ("Colorado", 2333.0, "Colorado;Utah;Arizona;Nevada;California"),
    ("Ohio", 1579.0, "Pennsylvania;Ohio;West Virginia;Indiana;Illinois;Kentucky"),
    ("Arkansas", 2348.0, "Colorado;Kansas;Oklahoma;Arkansas"),
    ("Delaware", 451.0, "New York;Pennsylvania;New Jersey;Delaware"),
    ("Rio Grande", 3034.0, "Colorado;New Mexico;Texas"),
    ("Red", 2044.0, "Texas;Oklahoma;Arkansas;Louisiana"),
    ("Snake", 1670.0, "Wyoming;Idaho;Oregon;Washington"),
    ("Columbia", 2000.0, "Washington;Oregon"),
    ("Hudson", 492.0, "New York"),
    ("Potomac", 616.0, "West Virginia;Maryland;Virginia"),
    ("Platte", 499.0, "Nebraska"),
    ("Wabash", 764.0, "Ohio;Indiana;Illinois"),
    ("Yellowstone", 1080.0, "Wyoming;Montana;North Dakota"),
    ("Sacramento", 640.0, "California"),
    ("Savannah", 505.0, "South Carolina;Georgia"),
    ("Brazos", 2060.0, "Texas"),
    ("Pecos", 1490.0, "New Mexico;Texas"),
    ("Gila", 1044.0, "New Mexico;Arizona"),
    ("Tombigbee", 525.0, "Mississippi;Alabama"),
    ("Allegheny", 523.0, "Pennsylvania;New York"),
];

/// name, elevation (m), state.
pub const PLACES: &[(&str, f64, &str)] = &[
    ("Mount Mckinley", 6194.0, "Alaska"),
    ("Mount Whitney", 4418.0, "California"),
    ("Mount Elbert", 4399.0, "Colorado"),
    ("Mount Rainier", 4392.0, "Washington"),
    ("Mauna Kea", 4205.0, "Hawaii"),
    ("Gannett Peak", 4202.0, "Wyoming"),
    ("Kings Peak", 4123.0, "Utah"),
    ("Wheeler Peak", 4011.0, "New Mexico"),
    ("Boundary Peak", 4005.0, "Nevada"),
    ("Granite Peak", 3901.0, "Montana"),
    ("Borah Peak", 3859.0, "Idaho"),
    ("Humphreys Peak", 3851.0, "Arizona"),
    ("Mount Hood", 3424.0, "Oregon"),
    ("Guadalupe Peak", 2667.0, "Texas"),
    ("Harney Peak", 2207.0, "South Dakota"),
    ("Clingmans Dome", 2025.0, "Tennessee"),
    ("Mount Mitchell", 2037.0, "North Carolina"),
    ("Mount Washington", 1917.0, "New Hampshire"),
    ("Mount Rogers", 1746.0, "Virginia"),
    ("Panorama Point", 1654.0, "Nebraska"),
    ("Mount Marcy", 1629.0, "New York"),
    ("Mount Katahdin", 1606.0, "Maine"),
    ("Black Mesa", 1516.0, "Oklahoma"),
    ("Spruce Knob", 1482.0, "West Virginia"),
    ("Brasstown Bald", 1458.0, "Georgia"),
    ("Mount Mansfield", 1339.0, "Vermont"),
    ("Black Mountain", 1263.0, "Kentucky"),
    ("Mount Sunflower", 1231.0, "Kansas"),
    ("Sassafras Mountain", 1085.0, "South Carolina"),
    ("White Butte", 1069.0, "North Dakota"),
    ("Mount Greylock", 1064.0, "Massachusetts"),
    ("Backbone Mountain", 1024.0, "Maryland"),
    ("Mount Davis", 979.0, "Pennsylvania"),
    ("Magazine Mountain", 839.0, "Arkansas"),
    ("Cheaha Mountain", 734.0, "Alabama"),
    ("Mount Frissell", 725.0, "Connecticut"),
    ("Eagle Mountain", 701.0, "Minnesota"),
    ("Mount Arvon", 604.0, "Michigan"),
    ("Timms Hill", 595.0, "Wisconsin"),
    ("High Point", 550.0, "New Jersey"),
    ("Taum Sauk Mountain", 540.0, "Missouri"),
    ("Hawkeye Point", 509.0, "Iowa"),
    ("Campbell Hill", 472.0, "Ohio"),
    ("Hoosier Hill", 383.0, "Indiana"),
    ("Charles Mound", 376.0, "Illinois"),
    ("Jerimoth Hill", 247.0, "Rhode Island"),
    ("Woodall Mountain", 246.0, "Mississippi"),
    ("Driskill Mountain", 163.0, "Louisiana"),
    ("Ebright Azimuth", 137.0, "Delaware"),
    ("Britton Hill", 105.0, "Florida"),
    ("Death Valley", -86.0, "California"),
];

pub fn schema() -> &'static str {
    "state,name,capital:ref(city),population:num,area:num!,density:num,next_to:ref(state)\n\
     city,name,loc:ref(state),population:num!\n\
     river,name,len:num!,traverse:ref(state),loc:ref(state)\n\
     place,name,elevation:num!,loc:ref(state)\n"
}

pub fn state_csv() -> String {
    let mut out = String::from("name,capital,population,area,density,next_to\n");
    for (name, capital, pop, area, next) in STATES {
        let density = (pop / area * 100.0).round() / 100.0;
        writeln!(out, "{name},{capital},{pop},{area},{density},{next}").unwrap();
    }
    out
}

pub fn city_csv() -> String {
    let mut out = String::from("name,loc,population\n");
    for (state, capital, ..) in STATES {
        let pop = CAPITAL_POPULATIONS
            .iter()
            .find(|(c, _)| c == capital)
            .map(|(_, p)| *p)
            .unwrap_or(25000.0);
        writeln!(out, "{capital},{state},{pop}").unwrap();
    }
    for (name, state, pop) in EXTRA_CITIES {
        writeln!(out, "{name},{state},{pop}").unwrap();
    }
    out
}

pub fn river_csv() -> String {
    let mut out = String::from("name,len,traverse,loc\n");
    for (name, len, states) in RIVERS {
        writeln!(out, "{name},{len},{states},{states}").unwrap();
    }
    out
}

pub fn place_csv() -> String {
    let mut out = String::from("name,elevation,loc\n");
    for (name, elevation, state) in PLACES {
        writeln!(out, "{name},{elevation},{state}").unwrap();
    }
    out
}

pub fn lexicon() -> &'static str {
    "how many\tcount\n\
     number of\tcount\n\
     through\ttraverse\n\
     population density\tdensity\n\
     population per km2\tdensity\n\
     largest\tlargest\n\
     biggest\tlargest\n\
     smallest\tsmallest\n\
     highest\thighest\n\
     tallest\thighest\n\
     lowest\tlowest\n\
     longest\tlongest\n\
     shortest\tshortest\n\
     most\tmost\n\
     fewest\tfewest\n\
     least\tfewest\n\
     total\tsum\n\
     major\tmajor\n\
     border\tnext_to\n\
     borders\tnext_to\n\
     bordering\tnext_to\n\
     neighboring\tnext_to\n\
     adjacent\tnext_to\n"
}

/// Sentences other tests reproduce byte for byte; all go to the train split.
pub const PINNED: &[(&str, &str)] = &[
    (
        "How many rivers does Mississippi have ?",
        "answer(A,count(B,(river(B),const(C,stateid(Mississippi)),loc(B,C)),A))",
    ),
    (
        "What is the population of San Antonio ?",
        "answer(A,population(B,A),const(B,cityid(San Antonio)))",
    ),
    (
        "How many states does the Mississippi run through ?",
        "answer(A,count(B,(state(B),const(C,riverid(Mississippi)),traverse(C,B)),A))",
    ),
    (
        "Which states does the Mississippi river run through ?",
        "answer(A,(state(A),const(B,riverid(Mississippi)),traverse(B,A)))",
    ),
    (
        "In what state is Mount Mckinley ?",
        "answer(A,(state(A),const(B,placeid(Mount Mckinley)),loc(B,A)))",
    ),
    (
        "What is the highest point in Florida ?",
        "answer(A,highest(A,(place(A),loc(A,B),const(B,stateid(Florida)))))",
    ),
    (
        "what state has the smallest population density ?",
        "answer(A,smallest(B,(state(A),density(A,B))))",
    ),
    (
        "what state has the largest population ?",
        "answer(A,largest(B,(state(A),population(A,B))))",
    ),
    (
        "what state has no rivers ?",
        "answer(A,(state(A),not((river(B),loc(B,A)))))",
    ),
    (
        "Where is the lowest spot in Iowa ?",
        "answer(A,lowest(A,(place(A),loc(A,B),const(B,stateid(Iowa)))))",
    ),
    (
        "How many people live in Mississippi ?",
        "answer(A,population(B,A),const(B,stateid(Mississippi)))",
    ),
];

/// All template instantiations, before sampling.
pub fn question_pool() -> Vec<(String, String)> {
    let mut pool: Vec<(String, String)> = Vec::new();
    let states: Vec<&str> = STATES.iter().map(|s| s.0).collect();
    let rivers: Vec<&str> = RIVERS.iter().map(|r| r.0).collect();
    let places: Vec<&str> = PLACES.iter().map(|p| p.0).collect();
    let mut cities: Vec<&str> = STATES.iter().map(|s| s.1).collect();
    cities.extend(EXTRA_CITIES.iter().map(|c| c.0));

    for s in &states {
        pool.push((
            format!("what is the capital of {s} ?"),
            format!("answer(A,(capital(A),loc(A,B),const(B,stateid({s}))))"),
        ));
        pool.push((
            format!("what is the population of {s} ?"),
            format!("answer(A,population(B,A),const(B,stateid({s})))"),
        ));
        pool.push((
            format!("how many people live in {s} ?"),
            format!("answer(A,population(B,A),const(B,stateid({s})))"),
        ));
        pool.push((
            format!("how many rivers does {s} have ?"),
            format!("answer(A,count(B,(river(B),const(C,stateid({s})),loc(B,C)),A))"),
        ));
        pool.push((
            format!("what is the highest point in {s} ?"),
            format!("answer(A,highest(A,(place(A),loc(A,B),const(B,stateid({s})))))"),
        ));
        pool.push((
            format!("where is the lowest spot in {s} ?"),
            format!("answer(A,lowest(A,(place(A),loc(A,B),const(B,stateid({s})))))"),
        ));
        pool.push((
            format!("what states border {s} ?"),
            format!("answer(A,(state(A),next_to(A,B),const(B,stateid({s}))))"),
        ));
        pool.push((
            format!("how many states border {s} ?"),
            format!("answer(A,count(B,(state(B),next_to(B,C),const(C,stateid({s}))),A))"),
        ));
        pool.push((
            format!("what is the longest river in {s} ?"),
            format!("answer(A,longest(A,(river(A),loc(A,B),const(B,stateid({s})))))"),
        ));
        pool.push((
            format!("what rivers are in {s} ?"),
            format!("answer(A,(river(A),loc(A,B),const(B,stateid({s}))))"),
        ));
        pool.push((
            format!("what cities are in {s} ?"),
            format!("answer(A,(city(A),loc(A,B),const(B,stateid({s}))))"),
        ));
        pool.push((
            format!("what is the area of {s} ?"),
            format!("answer(A,area(B,A),const(B,stateid({s})))"),
        ));
        pool.push((
            format!("what is the largest city in {s} ?"),
            format!("answer(A,largest(A,(city(A),loc(A,B),const(B,stateid({s})))))"),
        ));
        pool.push((
            format!("what is the total length of the rivers in {s} ?"),
            format!("answer(A,sum(B,(river(C),len(C,B),loc(C,D),const(D,stateid({s}))),A))"),
        ));
        pool.push((
            format!("what major cities are in {s} ?"),
            format!("answer(A,(major(A),city(A),loc(A,B),const(B,stateid({s}))))"),
        ));
        pool.push((
            format!("what is the density of {s} ?"),
            format!("answer(A,density(B,A),const(B,stateid({s})))"),
        ));
        pool.push((
            format!("what is the population of the capital of {s} ?"),
            format!("answer(A,(population(B,A),capital(B),loc(B,C),const(C,stateid({s}))))"),
        ));
        pool.push((
            format!("how many cities are in {s} ?"),
            format!("answer(A,count(B,(city(B),loc(B,C),const(C,stateid({s}))),A))"),
        ));
        pool.push((
            format!("what rivers run through {s} ?"),
            format!("answer(A,(river(A),traverse(A,B),const(B,stateid({s}))))"),
        ));
    }
    for r in &rivers {
        pool.push((
            format!("how many states does the {r} run through ?"),
            format!("answer(A,count(B,(state(B),const(C,riverid({r})),traverse(C,B)),A))"),
        ));
        pool.push((
            format!("which states does the {r} river run through ?"),
            format!("answer(A,(state(A),const(B,riverid({r})),traverse(B,A)))"),
        ));
        pool.push((
            format!("how long is the {r} ?"),
            format!("answer(A,len(B,A),const(B,riverid({r})))"),
        ));
    }
    for p in &places {
        pool.push((
            format!("in what state is {p} ?"),
            format!("answer(A,(state(A),const(B,placeid({p})),loc(B,A)))"),
        ));
        pool.push((
            format!("how high is {p} ?"),
            format!("answer(A,elevation(B,A),const(B,placeid({p})))"),
        ));
    }
    for c in &cities {
        pool.push((
            format!("what is the population of {c} ?"),
            format!("answer(A,population(B,A),const(B,cityid({c})))"),
        ));
        pool.push((
            format!("what state is {c} in ?"),
            format!("answer(A,(state(A),const(B,cityid({c})),loc(B,A)))"),
        ));
        pool.push((
            format!("where is {c} ?"),
            format!("answer(A,loc(B,A),const(B,cityid({c})))"),
        ));
    }
    pool.push((
        "what state has the most cities ?".into(),
        "answer(A,most(A,B,(state(A),city(B),loc(B,A))))".into(),
    ));
    pool.push((
        "which river runs through the most states ?".into(),
        "answer(A,most(A,B,(river(A),traverse(A,B))))".into(),
    ));
    pool.push((
        "which state borders the fewest states ?".into(),
        "answer(A,fewest(A,B,(state(A),next_to(A,B))))".into(),
    ));
    pool.push((
        "what is the biggest state ?".into(),
        "answer(A,largest(A,state(A)))".into(),
    ));
    pool.push((
        "what is the smallest state ?".into(),
        "answer(A,smallest(A,state(A)))".into(),
    ));
    pool.push((
        "what is the longest river ?".into(),
        "answer(A,longest(A,river(A)))".into(),
    ));
    pool.push((
        "what is the highest point in the united states ?".into(),
        "answer(A,highest(A,place(A)))".into(),
    ));
    pool.push((
        "what are the major rivers ?".into(),
        "answer(A,(major(A),river(A)))".into(),
    ));
    pool
}

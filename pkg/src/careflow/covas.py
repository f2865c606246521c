"""Built-in normative net for the COVID ICU care pathway (COVAS model).

The model: admission (Start), optional symptom onset, hospitalization forking
three parallel branches (oxygen therapy, symptom resolution, optional ICU
pathway with optional ventilation and optional ECMO), an AND-join, discharge
dead or alive, and End. Six silent transitions t0..t5 route the skips and the
join; their ids are stable so replay diagnostics are reproducible.

Place numbering follows the source drawing, which skips p10; the net has 18
places, 15 labeled transitions and 6 silent ones.
"""

from .petri import Marking, PetriNet, Transition

ACTIVITIES = (
    "Start", "startSymptoms", "Hospitalization", "startOxygen", "endOxygen",
    "endSymptoms", "ICUadmission", "startVentilation", "startECMO", "endECMO",
    "endVentilation", "ICUdischarge", "DischDead", "DischAlive", "End",
)

_PLACES = ("p1", "p2", "p3", "p4", "p5", "p6", "p7", "p8", "p9",
           "p11", "p12", "p13", "p14", "p15", "p16", "p17", "p18", "p19")

_SILENT = ("t0", "t1", "t2", "t3", "t4", "t5")

_ARCS = (
    ("p1", "Start"), ("Start", "p2"),
    # optional symptom onset: t0 skips startSymptoms
    ("p2", "startSymptoms"), ("startSymptoms", "p3"),
    ("p2", "t0"), ("t0", "p3"),
    # hospitalization forks three parallel branches
    ("p3", "Hospitalization"),
    ("Hospitalization", "p4"), ("Hospitalization", "p5"), ("Hospitalization", "p6"),
    # branch 1: oxygen therapy, mandatory (the drawing shows no skip)
    ("p4", "startOxygen"), ("startOxygen", "p7"),
    ("p7", "endOxygen"), ("endOxygen", "p8"),
    # branch 2: symptom resolution, t1 skips endSymptoms
    ("p5", "endSymptoms"), ("endSymptoms", "p9"),
    ("p5", "t1"), ("t1", "p9"),
    # branch 3: ICU pathway, t4 skips the whole block
    ("p6", "ICUadmission"), ("ICUadmission", "p11"),
    ("p6", "t4"), ("t4", "p16"),
    ("p11", "startVentilation"), ("startVentilation", "p12"),
    ("p11", "t2"), ("t2", "p15"),
    ("p12", "startECMO"), ("startECMO", "p13"),
    ("p12", "t3"), ("t3", "p14"),
    ("p13", "endECMO"), ("endECMO", "p14"),
    ("p14", "endVentilation"), ("endVentilation", "p15"),
    ("p15", "ICUdischarge"), ("ICUdischarge", "p16"),
    # t5 joins the three branches
    ("p8", "t5"), ("p9", "t5"), ("p16", "t5"), ("t5", "p17"),
    # outcome choice, then End
    ("p17", "DischDead"), ("p17", "DischAlive"),
    ("DischDead", "p18"), ("DischAlive", "p18"),
    ("p18", "End"), ("End", "p19"),
)


def covas_model() -> PetriNet:
    """The normative care-pathway net, initial marking {p1:1}, final {p19:1}."""
    transitions = tuple(Transition(a, a) for a in ACTIVITIES) + \
        tuple(Transition(t, None) for t in _SILENT)
    return PetriNet(
        places=_PLACES,
        transitions=transitions,
        arcs=_ARCS,
        initial_marking=Marking({"p1": 1}),
        final_marking=Marking({"p19": 1}),
        name="covas",
    )

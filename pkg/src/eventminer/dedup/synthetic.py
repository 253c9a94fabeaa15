"""Seeded synthetic news corpus with planted duplicate groups.

Duplicates are paraphrases: same underlying event re-rendered through a
different sentence skeleton with synonym swaps and light field jitter
(victim count +-1, publication a day or three later, occasional unknown
flags). Singleton events fill the rest of the corpus. Texts are long enough
to pass the OCR prescreen and carry the publication date on the first line,
the way the prompt expects to find it.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from eventminer.dedup.features import ArticleView
from eventminer.dedup.forest import PairLabel, pair_key
from eventminer.geocode import GeoPoint
from eventminer.parsing import ExtractionRecord, TriState


def _municipalities() -> list[tuple[str, str, float, float]]:
    text = (resources.files("eventminer")
            / "data/municipalities.csv").read_text("utf-8")
    return [(r["name"], r["department"], float(r["latitude"]),
             float(r["longitude"]))
            for r in csv.DictReader(io.StringIO(text))]


# (display names, canonical profile)
_GROUPS = [
    (["las FARC", "guerrilleros de las FARC", "las Farc-EP"],
     {"guerrilla": True, "farc": True}),
    (["el ELN", "guerrilleros del ELN"],
     {"guerrilla": True, "eln": True}),
    (["el EPL"], {"guerrilla": True, "epl": True}),
    (["las AUC", "los paramilitares", "las autodefensas"], {"auc": True}),
    (["los Rastrojos", "una banda criminal", "el Clan del Golfo"],
     {"criminal": True}),
    (["hombres armados", "un grupo armado no identificado", "desconocidos"],
     {}),
]

_TYPES = {
    "murder": {
        "verbs": ["asesinaron a", "mataron a", "acabaron con la vida de"],
        "nouns": ["asesinato", "masacre", "homicidio", "crimen"],
        "victims": ["campesinos", "civiles", "pobladores"],
    },
    "attack": {
        "verbs": ["atacaron a", "hirieron a", "emboscaron a"],
        "nouns": ["ataque", "atentado", "emboscada"],
        "victims": ["civiles", "comerciantes", "militares"],
    },
    "kidnapping": {
        "verbs": ["secuestraron a", "se llevaron por la fuerza a",
                  "plagiaron a"],
        "nouns": ["secuestro", "plagio", "retencion"],
        "victims": ["comerciantes", "campesinos", "funcionarios"],
    },
    "conflict": {
        "verbs": ["se enfrentaron con", "sostuvieron combates con",
                  "chocaron con"],
        "nouns": ["enfrentamiento", "combate", "hostigamiento"],
        "victims": ["militares", "guerrilleros", "combatientes"],
    },
    "harassment": {
        "verbs": ["amenazaron a", "intimidaron a", "hostigaron a"],
        "nouns": ["amenaza", "intimidacion", "panfleto"],
        "victims": ["lideres comunales", "maestros", "campesinos"],
    },
}

_SKELETONS = [
    ("En la madrugada de ayer {group} {verb} {count} {victims} en zona rural "
     "de {city} ({dept}). Las autoridades confirmaron el {noun} y reforzaron "
     "la presencia de la fuerza publica en la region."),
    ("Las autoridades del departamento de {dept} informaron que {count} "
     "{victims} fueron victimas de un {noun} perpetrado por {group} en el "
     "municipio de {city}. El hecho ocurrio en horas de la noche."),
    ("Un nuevo {noun} enluta al municipio de {city}, en {dept}, donde "
     "{group} {verb} {count} {victims} segun el reporte oficial entregado "
     "por la alcaldia."),
    ("Pobladores de {city} ({dept}) denunciaron que {group} {verb} {count} "
     "{victims} durante la jornada del pasado fin de semana. El {noun} fue "
     "condenado por las autoridades locales."),
]

_FILLERS = [
    "La comunidad pidio mayor acompanamiento del Estado y de los organismos "
    "de derechos humanos.",
    "La personeria municipal documento el caso y lo remitio a la fiscalia "
    "seccional para lo de su competencia.",
    "Habitantes de la zona senalaron que los hechos de violencia se han "
    "repetido durante los ultimos meses.",
    "El parte oficial fue entregado en rueda de prensa por el comandante de "
    "la policia del departamento.",
    "Organizaciones sociales rechazaron el hecho y convocaron una jornada "
    "de protesta pacifica.",
    "Las autoridades ofrecieron una recompensa por informacion que permita "
    "dar con los responsables.",
    "La alcaldia decreto tres dias de duelo y anuncio un consejo de "
    "seguridad extraordinario.",
    "El gobernador anuncio que pedira refuerzos a la brigada del ejercito "
    "con sede en la capital departamental.",
]

_SOURCES = ["El Heraldo Regional", "Diario del Oriente", "La Voz del Rio",
            "El Observador"]

_TONES = ["grave", "alarmado", "sobrio", "indignado"]

_SUMMARIES = [
    "{group_cap} {verb} {count} {victims} en {city} ({dept}). Las "
    "autoridades investigan el {noun}.",
    "Un {noun} atribuido a {group} dejo {count} {victims} afectados en "
    "{city}, {dept}.",
]


@dataclass(frozen=True)
class SyntheticArticle:
    article_id: str
    source: str
    publication_date: dt.date
    text: str
    record: ExtractionRecord
    point: GeoPoint | None
    event_date: dt.date
    group_id: str
    scope: str  # "single" | "focal" | "multi"

    def view(self) -> ArticleView:
        return ArticleView(record=self.record, text=self.text,
                           point=self.point, event_date=self.event_date)


@dataclass(frozen=True)
class _Event:
    group_id: str
    type_key: str
    group_idx: int
    muni_idx: int
    victim_count: int
    event_date: dt.date


def _pick(rng: np.random.Generator, seq):
    return seq[int(rng.integers(0, len(seq)))]


def _render(rng: np.random.Generator, ev: _Event, munis) -> dict:
    name, dept, _lat, _lon = munis[ev.muni_idx]
    tdata = _TYPES[ev.type_key]
    group_names = _GROUPS[ev.group_idx][0]
    slots = {
        "group": _pick(rng, group_names),
        "verb": _pick(rng, tdata["verbs"]),
        "noun": _pick(rng, tdata["nouns"]),
        "victims": _pick(rng, tdata["victims"]),
        "count": str(ev.victim_count),
        "city": name,
        "dept": dept,
    }
    slots["group_cap"] = slots["group"][0].upper() + slots["group"][1:]
    return slots


def _make_text(rng: np.random.Generator, pub_date: dt.date,
               slots: dict) -> str:
    body = _pick(rng, _SKELETONS).format(**slots)
    fillers = list(rng.choice(len(_FILLERS), size=3, replace=False))
    paragraphs = [pub_date.strftime("%m-%d-%Y"), body]
    paragraphs.extend(_FILLERS[int(i)] for i in fillers)
    text = "\n".join(paragraphs)
    extra = 0
    while len(text) < 520:  # prescreen floor with margin
        text += "\n" + _FILLERS[extra % len(_FILLERS)]
        extra += 1
    return text


def _tri(flag: bool, rng: np.random.Generator, unknown_p: float) -> TriState:
    if rng.random() < unknown_p:
        return TriState.UNKNOWN
    return TriState.YES if flag else TriState.NO


def _make_record(rng: np.random.Generator, ev: _Event, munis,
                 pub_date: dt.date, slots: dict,
                 second_location: str | None) -> ExtractionRecord:
    name, dept, _lat, _lon = munis[ev.muni_idx]
    profile = _GROUPS[ev.group_idx][1]
    tdata = _TYPES[ev.type_key]
    unknown_p = 0.03
    army_fight = ev.type_key == "conflict" and bool(rng.random() < 0.5)

    n_words = 2 + int(rng.integers(0, 2))
    vwords = list(dict.fromkeys(
        [slots["noun"]] + [_pick(rng, tdata["nouns"]) for _ in range(n_words)]))
    locations = (name,) if second_location is None else (name, second_location)

    flags = {
        "murder": ev.type_key == "murder",
        "attack": ev.type_key == "attack",
        "kidnapping": ev.type_key == "kidnapping",
        "conflict": ev.type_key == "conflict",
        "harassment": ev.type_key == "harassment",
    }
    summary = _pick(rng, _SUMMARIES).format(**slots)
    front = None
    bloc = None
    if profile.get("farc") and rng.random() < 0.4:
        front = f"Frente {int(rng.integers(5, 60))}"
    if profile.get("auc") and rng.random() < 0.4:
        bloc = _pick(rng, ["Bloque Norte", "Bloque Calima"])

    return ExtractionRecord(
        article_id="",  # assigned later
        is_single_incident=TriState.YES,
        violence_words=tuple(vwords),
        victim_count=ev.victim_count,
        attacker_gender="masculino" if rng.random() < 0.8 else None,
        victim_gender=_pick(rng, ["masculino", "femenino"])
        if rng.random() < 0.6 else None,
        is_murder=_tri(flags["murder"], rng, unknown_p),
        is_attack_or_injury=_tri(flags["attack"], rng, unknown_p),
        is_kidnapping=_tri(flags["kidnapping"], rng, unknown_p),
        is_armed_conflict=_tri(flags["conflict"], rng, unknown_p),
        is_harassment_or_threats=_tri(flags["harassment"], rng, unknown_p),
        child_victim_count=0 if rng.random() < 0.2 else None,
        witness_words=("disparos", "panico") if rng.random() < 0.3 else (),
        locations=locations,
        attackers=(slots["group"],),
        victim_types=(slots["victims"],),
        event_month_year=(ev.event_date.month, ev.event_date.year),
        corpse_count=ev.victim_count if flags["murder"] else None,
        army_combatant=_tri(army_fight, rng, unknown_p),
        mentions_guerrilla=_tri(bool(profile.get("guerrilla")), rng, unknown_p),
        farc_involved=_tri(bool(profile.get("farc")), rng, unknown_p),
        auc_involved=_tri(bool(profile.get("auc")), rng, unknown_p),
        eln_involved=_tri(bool(profile.get("eln")), rng, unknown_p),
        epl_involved=_tri(bool(profile.get("epl")), rng, unknown_p),
        published_date=pub_date,
        tone=_pick(rng, _TONES),
        front_or_commission=front,
        bloc_or_narcoparamilitary=bloc,
        group_names=(slots["group"],) if rng.random() < 0.7 else (),
        civilians_killed_by_army=None,
        falsos_positivos_count=None,
        attacker_name=None,
        criminal_group_name=slots["group"]
        if profile.get("criminal") and rng.random() < 0.8 else None,
        summary=summary,
    )


def generate_synthetic_corpus(n_articles: int = 2000,
                              n_dup_groups: int = 500,
                              seed: int = 7,
                              start_year: int = 2002,
                              end_year: int = 2021,
                              geo_missing_p: float = 0.12,
                              ) -> list[SyntheticArticle]:
    """Build the corpus. Group ids are shared by duplicates; singleton
    events get their own."""
    rng = np.random.default_rng(seed)
    munis = _municipalities()
    type_keys = list(_TYPES)

    sizes = [3 if rng.random() < 0.03 else 2 for _ in range(n_dup_groups)]
    dup_articles = sum(sizes)
    if dup_articles > n_articles:
        raise ValueError("duplicate groups need more articles than available")
    n_singles = n_articles - dup_articles

    months = (end_year - start_year + 1) * 12
    events: list[tuple[_Event, int]] = []  # (event, copies)
    for g, size in enumerate(sizes):
        events.append((_make_event(rng, f"g{g:05d}", munis, type_keys,
                                   start_year, months), size))
    for s in range(n_singles):
        events.append((_make_event(rng, f"s{s:05d}", munis, type_keys,
                                   start_year, months), 1))

    drafts: list[SyntheticArticle] = []
    for ev, copies in events:
        base_count = ev.victim_count
        for _c in range(copies):
            jittered = ev
            if _c > 0 and rng.random() < 0.2:
                jittered = replace(ev, victim_count=max(1, base_count
                                                        + int(rng.integers(-1, 2))))
            pub = ev.event_date + dt.timedelta(days=int(rng.integers(0, 3)))
            slots = _render(rng, jittered, munis)
            second = None
            if rng.random() < 0.2:
                other = munis[int(rng.integers(0, len(munis)))]
                if other[0] != slots["city"]:
                    second = other[0]
            record = _make_record(rng, jittered, munis, pub, slots, second)
            text = _make_text(rng, pub, slots)
            point = None
            if rng.random() >= geo_missing_p:
                name, dept, lat, lon = munis[ev.muni_idx]
                point = GeoPoint(lat, lon, f"{name}, {dept}", dept)
            drafts.append(SyntheticArticle(
                article_id="", source=_pick(rng, _SOURCES),
                publication_date=pub, text=text, record=record, point=point,
                event_date=ev.event_date, group_id=ev.group_id,
                scope="single" if rng.random() < 0.8 else "focal"))

    order = rng.permutation(len(drafts))
    out: list[SyntheticArticle] = []
    for new_idx, old_idx in enumerate(order):
        d = drafts[int(old_idx)]
        aid = f"art{new_idx:05d}"
        out.append(replace(d, article_id=aid,
                           record=replace(d.record, article_id=aid)))
    return out


def _make_event(rng: np.random.Generator, group_id: str, munis, type_keys,
                start_year: int, months: int) -> _Event:
    m = int(rng.integers(0, months))
    year = start_year + m // 12
    month = m % 12 + 1
    day = int(rng.integers(1, 29))
    return _Event(
        group_id=group_id,
        type_key=_pick(rng, type_keys),
        group_idx=int(rng.integers(0, len(_GROUPS))),
        muni_idx=int(rng.integers(0, len(munis))),
        victim_count=int(rng.integers(1, 9)),
        event_date=dt.date(year, month, day),
    )


def label_candidate_pairs(pairs: list[tuple[str, str]],
                          group_of: dict[str, str]) -> list[PairLabel]:
    """Label blocking output against the planted groups."""
    labels = []
    for a, b in pairs:
        key = pair_key(a, b)
        same = group_of[key[0]] == group_of[key[1]]
        labels.append(PairLabel(key[0], key[1], same,
                                group_of[key[0]] if same else ""))
    return labels


def duplicate_rate(corpus: list[SyntheticArticle]) -> float:
    """Planted removal rate: 1 - events / articles."""
    return 1.0 - len({a.group_id for a in corpus}) / len(corpus)

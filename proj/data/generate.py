#!/usr/bin/env python3
"""Regenerates the bundled synthetic datasets, starter lexicon and multilingual corpus.

Output is deterministic (fixed seeds); rerunning overwrites the files in this
directory with identical content.
"""
import csv
import io
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent

FILLER = """the people this that really are is all you they today about my new city team game
again always just so what post comment here there every time week news online thread reply
said think know see going back from with over after before their our your some more most""".split()

MARKERS = {
    "hate": ["vermin", "subhuman", "invaders", "parasites", "infestation", "exterminate", "degenerates", "savages"],
    "offensive": ["idiot", "stupid", "moron", "dumb", "jerk", "crap", "loser", "clown"],
    "neither": ["lovely", "sunny", "coffee", "thanks", "garden", "concert", "recipe", "weekend"],
}

# word, polarity, emotion
LEXICON = [
    ("hate", -0.9, "anger"), ("hateful", -0.9, "anger"), ("angry", -0.7, "anger"), ("furious", -0.8, "anger"),
    ("rage", -0.8, "anger"), ("hostile", -0.6, "anger"), ("annoying", -0.4, "anger"), ("exterminate", -1.0, "anger"),
    ("kill", -0.9, "anger"), ("destroy", -0.7, "anger"), ("attack", -0.6, "anger"), ("idiot", -0.6, "anger"),
    ("moron", -0.6, "anger"), ("jerk", -0.5, "anger"), ("stupid", -0.5, "anger"), ("dumb", -0.4, "anger"),
    ("loser", -0.5, "anger"), ("clown", -0.3, "anger"),
    ("afraid", -0.6, "fear"), ("scared", -0.6, "fear"), ("fear", -0.7, "fear"), ("terrified", -0.8, "fear"),
    ("danger", -0.6, "fear"), ("threat", -0.6, "fear"), ("invaders", -0.7, "fear"), ("panic", -0.6, "fear"),
    ("worried", -0.4, "fear"), ("nervous", -0.3, "fear"),
    ("sad", -0.6, "sadness"), ("cry", -0.5, "sadness"), ("lonely", -0.6, "sadness"), ("miserable", -0.8, "sadness"),
    ("grief", -0.7, "sadness"), ("sorry", -0.3, "sadness"), ("hopeless", -0.8, "sadness"), ("tragic", -0.7, "sadness"),
    ("loss", -0.5, "sadness"), ("depressed", -0.7, "sadness"),
    ("happy", 0.8, "joy"), ("joy", 0.9, "joy"), ("joyful", 0.8, "joy"), ("lovely", 0.7, "joy"), ("love", 0.8, "joy"),
    ("wonderful", 0.9, "joy"), ("great", 0.6, "joy"), ("glad", 0.6, "joy"), ("delighted", 0.8, "joy"),
    ("thanks", 0.5, "joy"), ("fun", 0.6, "joy"), ("sunny", 0.4, "joy"), ("celebrate", 0.7, "joy"),
    ("surprised", 0.1, "surprise"), ("surprise", 0.2, "surprise"), ("amazing", 0.7, "surprise"),
    ("unexpected", 0.0, "surprise"), ("shocked", -0.3, "surprise"), ("astonished", 0.2, "surprise"),
    ("wow", 0.4, "surprise"), ("sudden", 0.0, "surprise"),
    ("disgusting", -0.8, "disgust"), ("gross", -0.6, "disgust"), ("vermin", -0.9, "disgust"),
    ("parasites", -0.9, "disgust"), ("filthy", -0.8, "disgust"), ("infestation", -0.8, "disgust"),
    ("subhuman", -1.0, "disgust"), ("degenerates", -0.9, "disgust"), ("savages", -0.9, "disgust"),
    ("crap", -0.5, "disgust"), ("nasty", -0.6, "disgust"), ("revolting", -0.8, "disgust"),
    ("good", 0.5, ""), ("nice", 0.5, ""), ("kind", 0.6, ""), ("friendly", 0.6, ""), ("helpful", 0.5, ""),
    ("beautiful", 0.7, ""), ("best", 0.6, ""), ("calm", 0.3, ""), ("peaceful", 0.5, ""), ("excellent", 0.8, ""),
    ("bad", -0.5, ""), ("awful", -0.7, ""), ("terrible", -0.7, ""), ("worst", -0.7, ""), ("ugly", -0.5, ""),
    ("wrong", -0.3, ""), ("rude", -0.5, ""), ("poor", -0.3, ""),
    ("coffee", 0.1, ""), ("garden", 0.2, ""), ("concert", 0.3, ""), ("recipe", 0.1, ""), ("weekend", 0.3, ""),
    ("table", 0.0, ""), ("city", 0.0, ""), ("team", 0.1, ""), ("news", 0.0, ""), ("game", 0.1, ""),
]


def sentence(rng, label):
    words = [rng.choice(FILLER) for _ in range(rng.randint(4, 9))]
    for _ in range(rng.randint(1, 2)):
        words.insert(rng.randint(0, len(words)), rng.choice(MARKERS[label]))
    text = " ".join(words)
    if rng.random() < 0.3:
        text = text.capitalize()
    if rng.random() < 0.4:
        text += rng.choice(["!", ".", "?", "!!", "..."])
    return text


def write_csv(path, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["text", "label"])
    w.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8")


def main():
    rng = random.Random(20240501)
    rows = [(sentence(rng, "offensive"), "offensive") for _ in range(360)]
    rows += [(sentence(rng, "hate"), "hate") for _ in range(120)]
    rows += [(sentence(rng, "neither"), "neither") for _ in range(120)]
    rng.shuffle(rows)
    write_csv(HERE / "synthetic_3label.csv", rows)

    rng = random.Random(64)
    rows = [(sentence(rng, "offensive"), "offensive") for _ in range(32)]
    rows += [(sentence(rng, "neither"), "neither") for _ in range(32)]
    rng.shuffle(rows)
    write_csv(HERE / "synthetic_keywords64.csv", rows)

    with open(HERE / "lexicon.tsv", "w", encoding="utf-8", newline="\n") as f:
        f.write("word\tpolarity\temotion\n")
        for word, pol, emo in LEXICON:
            f.write(f"{word}\t{pol}\t{emo}\n")

    write_multilingual(HERE / "multilingual.txt")


MULTI = {
    "en": "the quick brown fox jumps over a lazy dog while people talk about news online".split(),
    "es": "el rápido zorro marrón salta sobre perro perezoso mientras niños español mañana corazón".split(),
    "de": "der schnelle braune Fuchs springt über faulen Hund während Straße Grüße Mädchen".split(),
    "fr": "le renard brun rapide saute par-dessus chien paresseux pendant être très déjà où".split(),
    "el": "η γρήγορη καφέ αλεπού πηδάει πάνω από τον τεμπέλη σκύλο".split(),
    "ru": "быстрая коричневая лиса прыгает через ленивую собаку сегодня новости".split(),
    "ar": "الثعلب البني السريع يقفز فوق الكلب الكسول اليوم أخبار".split(),
    "hi": "तेज़ भूरी लोमड़ी आलसी कुत्ते के ऊपर कूदती है आज समाचार".split(),
    "zh": "敏捷的 棕色 狐狸 跳过 懒惰的 狗 今天 新闻 网络 评论".split(),
    "ja": "素早い 茶色の 狐が 怠惰な 犬を 飛び越える 今日 ニュース".split(),
    "ko": "빠른 갈색 여우가 게으른 개를 뛰어넘는다 오늘 뉴스".split(),
    "emoji": "😀 🔥 👍🏽 🇩🇪 ❤️ 🤔 👩‍👩‍👧 ✨".split(),
}


def write_multilingual(path):
    rng = random.Random(7)
    langs = sorted(MULTI)
    lines = []
    for i in range(600):
        parts = []
        for _ in range(rng.randint(1, 3)):
            lang = rng.choice(langs)
            parts.extend(rng.choice(MULTI[lang]) for _ in range(rng.randint(1, 4)))
        sep = rng.choice([" ", " ", " ", "  ", "\t", ", "])
        lines.append(sep.join(parts))
    lines.append("")  # an empty line is part of the corpus
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()

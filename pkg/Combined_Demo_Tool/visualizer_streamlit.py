"""
Minimal Streamlit visualizer: metrics curves, summary and the last events of
one run directory.

Run with:
streamlit run Combined_Demo_Tool/visualizer_streamlit.py
"""

import streamlit as st
import pandas as pd
import json
import os
from collections import Counter

st.title("Ring-road run viewer (minimal)")
st.markdown("Metrics of one run directory, its summary and the last 50 events.")

run_dir = st.text_input("Run directory", value="runs/ncc_inviscid")


def load_events(path, n=50):
    if not os.path.exists(path):
        return []
    with open(path, "r", encoding="utf-8") as f:
        lines = f.readlines()
    events = [json.loads(l) for l in lines]
    return events[-n:]


metrics_path = os.path.join(run_dir, "metrics.csv")
if not os.path.exists(metrics_path):
    st.info("No metrics.csv found. Run `python Combined_Demo_Tool/ring_cli.py run <scenario>` first.")
else:
    metrics = pd.read_csv(metrics_path).set_index("t")
    for column in ("sup_angular_error", "sup_accel", "clf", "min_gap", "sup_orientation"):
        st.subheader(column)
        st.line_chart(metrics[column])
    summary_path = os.path.join(run_dir, "summary.json")
    if os.path.exists(summary_path):
        with open(summary_path, encoding="utf-8") as f:
            st.json(json.load(f))

events = load_events(os.path.join(run_dir, "events.log"), 200)
if events:
    st.write("Last events (most recent first):")
    for ev in reversed(events[-50:]):
        st.json(ev)
    counts = Counter([e.get("type") for e in events])
    st.write("Event counts:")
    st.table(dict(counts))

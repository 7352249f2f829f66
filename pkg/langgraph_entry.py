# langgraph_entry.py
from risopt.graph import TrialGraph

graph = TrialGraph().compile()

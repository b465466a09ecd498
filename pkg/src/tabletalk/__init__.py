"""tabletalk: location-based dish personas.

Dishes are chat personas: they notify nearby users through geofences,
answer free-text questions through a rule-based intent matcher, and are
recommended through profile-aware explore/exploit feeds. Restaurateurs
author content and read KPIs over the HTTP gateway.
"""

__version__ = "0.1.0"
